"""Dialogue bridge: grammar, templates, and pluggable extraction backends."""

from .dialogue import DialogueBridge, describe
from .grammar import GrammarBackend, parse, parse_with_info
from .llm import ChatCompletionBackend, parse_reply
from .stub import ConfusionModel, StubBackend, StubChatServer
from .types import (
    BackendUnavailable,
    Command,
    CommandKind,
    DialogueContext,
    MalformedReply,
    Response,
    ResponseCategory,
    SymbolicState,
    VerbosityPolicy,
)

__all__ = [
    "BackendUnavailable",
    "ChatCompletionBackend",
    "Command",
    "CommandKind",
    "ConfusionModel",
    "DialogueBridge",
    "DialogueContext",
    "GrammarBackend",
    "MalformedReply",
    "Response",
    "ResponseCategory",
    "StubBackend",
    "StubChatServer",
    "SymbolicState",
    "VerbosityPolicy",
    "describe",
    "parse",
    "parse_reply",
    "parse_with_info",
]
