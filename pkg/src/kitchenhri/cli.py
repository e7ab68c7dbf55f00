"""Command-line entry points: interactive session, trials, bench, replay."""

from __future__ import annotations

import argparse
import json
import os
import queue
import sys
import threading
import time
from typing import Optional

from .bus import Topic
from .config import RunConfig, calibrated_noise_config
from .session import Session
from .speech import AgeGroup


def _load_config(args) -> RunConfig:
    if getattr(args, "calibrated", False):
        config = calibrated_noise_config()
    elif getattr(args, "config", None):
        config = RunConfig.load(args.config)
    else:
        config = RunConfig()
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    return config


# ---------------------------------------------------------------------------
# interactive


def _stdin_feeder(lines_q: "queue.Queue[Optional[str]]") -> None:
    for line in sys.stdin:
        lines_q.put(line.rstrip("\n"))
    lines_q.put(None)  # end of input


def _render(env) -> Optional[str]:
    if env.topic == Topic.RESPONSE_OUT:
        return f"robot> {env.payload.text}"
    if env.topic == Topic.TRIAL_EVENT and env.payload.kind == "stopped":
        return "[system stopped: type 'reset' to continue or end input to quit]"
    return None


def cmd_interactive(args) -> int:
    config = _load_config(args)
    if args.age:
        config.trial["true_age_group"] = args.age
    session = Session(config)
    feed_sub = session.bus.subscribe("console", *list(Topic))
    gateway = None
    if args.gateway:
        from .gateway import Gateway
        gateway = Gateway(port=args.port if args.port is not None
                          else config.gateway_port).start()
        print(f"[gateway listening on ws://127.0.0.1:{gateway.port}]", flush=True)

    session.publish_snapshot("initial")
    lines_q: "queue.Queue[Optional[str]]" = queue.Queue()
    eof = False
    if sys.stdin.isatty() or args.gateway:
        # live input may never close; feed it from a thread
        threading.Thread(target=_stdin_feeder, args=(lines_q,), daemon=True).start()
    else:
        # piped input is a finite script: take it all now so @tick scheduling
        # is deterministic regardless of loop speed
        for line in sys.stdin:
            lines_q.put(line.rstrip("\n"))
        lines_q.put(None)
    idle_grace = 0
    scheduled_resets: list[int] = []
    while True:
        while not eof:
            try:
                line = lines_q.get_nowait()
            except queue.Empty:
                break
            if line is None:
                eof = True
                break
            line = line.strip()
            if not line:
                continue
            if line.lower() == "reset":
                session.reset()
                continue
            if line.startswith("@"):
                tick_str, _, rest = line[1:].partition(" ")
                if tick_str.isdigit() and rest.strip():
                    if rest.strip().lower() == "reset":
                        scheduled_resets.append(int(tick_str))
                    else:
                        session.submit(rest.strip(), at_tick=int(tick_str))
                    continue
            session.submit(line)
        if gateway:
            for frame in gateway.drain_inbound():
                _apply_gateway_frame(session, frame)
        upcoming = session.tick_count + 1
        if any(t <= upcoming for t in scheduled_resets):
            scheduled_resets = [t for t in scheduled_resets if t > upcoming]
            session.reset()
        session.step()
        for env in feed_sub.drain():
            rendered = _render(env)
            if rendered:
                print(rendered, flush=True)
            if gateway:
                gateway.broadcast(env.to_json())
        if eof and session.quiescent() and (not gateway or args.exit_on_eof):
            idle_grace += 1
            if idle_grace >= 2:
                break
        else:
            idle_grace = 0
        if args.tick_seconds > 0:
            time.sleep(args.tick_seconds)
        if session.tick_count >= args.max_ticks:
            break
    print("final world:")
    print(json.dumps(session.world.snapshot(), indent=2, sort_keys=True))
    if gateway:
        gateway.close()
    return 0


def _apply_gateway_frame(session: Session, frame: dict) -> None:
    kind = frame.get("type")
    if kind == "utterance" and frame.get("text"):
        group = frame.get("age_group")
        session.submit(str(frame["text"]),
                       age_group=AgeGroup(group) if group else None)
    elif kind == "interrupt":
        session.request_interrupt(major=True)
    elif kind == "reset":
        session.reset()
    elif kind == "set_age" and frame.get("group"):
        session.default_age = AgeGroup(frame["group"])


# ---------------------------------------------------------------------------
# trials


def cmd_trials(args) -> int:
    from .bench.metrics import compute_metrics
    from .bench.trials import run_trials

    config = _load_config(args)
    logs = run_trials(args.scenario, args.n, args.seed, config)
    metrics = compute_metrics(logs)
    os.makedirs(args.out, exist_ok=True)
    for i, log in enumerate(logs):
        log.write(os.path.join(args.out, f"trial_s{args.scenario}_{i:04d}.jsonl"))
    metrics_path = os.path.join(args.out, f"metrics_s{args.scenario}.json")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(metrics.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    report = metrics.render_table()
    with open(os.path.join(args.out, f"metrics_s{args.scenario}.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(report + "\n")
    print(report)
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench_generate(args) -> int:
    from .bench.generator import generate_benchmark, write_benchmark

    manifest = None
    if args.manifest:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    instructions = generate_benchmark(manifest, seed=args.seed)
    write_benchmark(instructions, args.out)
    print(f"wrote {len(instructions)} instructions to {args.out}")
    return 0


def _build_eval_backend(args, config: RunConfig, stack):
    from .nlu.grammar import GrammarBackend
    from .nlu.llm import ChatCompletionBackend
    from .nlu.stub import StubChatServer

    if args.backend == "grammar":
        return GrammarBackend()
    if args.backend == "stub":
        # the stub serves the chat-completion wire format on localhost so the
        # external client path is exercised end to end, offline
        server = stack.enter_context(
            StubChatServer(rates=config.nlu["stub_confusion"], seed=config.seed))
        return ChatCompletionBackend(base_url=server.url, model="stub")
    ext = config.nlu["external"]
    if not ext["base_url"]:
        raise ValueError("external backend requires nlu.external.base_url in the config")
    return ChatCompletionBackend(
        base_url=ext["base_url"], model=ext["model"],
        api_key_env=ext["api_key_env"], timeout_s=float(ext["timeout_s"]),
        log_bodies=bool(ext["log_bodies"]),
    )


def cmd_bench_eval(args) -> int:
    import contextlib

    from .bench.evaluate import evaluate_backend
    from .bench.generator import generate_benchmark, read_benchmark

    config = _load_config(args)
    instructions = (read_benchmark(args.benchmark) if args.benchmark
                    else generate_benchmark())
    with contextlib.ExitStack() as stack:
        backend = _build_eval_backend(args, config, stack)
        report = evaluate_backend(backend, instructions, runs=args.runs)
    print(report.render_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def cmd_bench_robot(args) -> int:
    from .bench.robot_eval import run_robot_eval

    config = _load_config(args)
    if args.grasp_fail is not None:
        config.planner["p_grasp_fail"] = args.grasp_fail
    report = run_robot_eval(args.scenario, args.n, args.seed, config)
    print(report.render_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# replay


def cmd_replay(args) -> int:
    from .bench.trials import TrialLog, replay_log

    log = TrialLog.read(args.log)
    final_mode = "unknown"
    for frame in log.frames:
        payload = frame["payload"]
        topic = frame["topic"]
        if topic == "utterance_in":
            print(f"[t{frame['tick']:04d}] user>  {payload['text']}"
                  + ("  (again)" if payload.get("resubmission") else ""))
        elif topic == "response_out":
            print(f"[t{frame['tick']:04d}] robot> {payload['text']}")
        elif topic == "trial_event" and payload["kind"] == "world_snapshot":
            final_mode = payload["data"]["mode"]
    if args.verify:
        replayed = replay_log(log)
        if replayed.to_lines() == log.to_lines():
            print("verify: PASS (byte-identical regeneration)")
        else:
            print("verify: FAIL (log does not regenerate)")
            return 1
    success = log.summary.get("success")
    print(f"final state: {final_mode}; success={success}; "
          f"delivered={log.delivered_types()}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kitchenhri",
        description="Interruptible kitchen service robot: simulator and bench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interactive", help="run a live session on stdin")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--calibrated", action="store_true",
                   help="use the noise-calibrated preset")
    p.add_argument("--age", choices=[g.value for g in AgeGroup])
    p.add_argument("--gateway", action="store_true")
    p.add_argument("--port", type=int)
    p.add_argument("--tick-seconds", type=float, default=0.2)
    p.add_argument("--max-ticks", type=int, default=100000)
    p.add_argument("--exit-on-eof", action="store_true",
                   help="with --gateway, still exit once stdin ends and the plan settles")
    p.set_defaults(func=cmd_interactive)

    p = sub.add_parser("trials", help="run scripted system trials")
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--calibrated", action="store_true")
    p.add_argument("--out", default="trial_logs")
    p.set_defaults(func=cmd_trials)

    bench = sub.add_parser("bench", help="benchmark generation and evaluation")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    p = bench_sub.add_parser("generate", help="emit the instruction benchmark")
    p.add_argument("--out", default="benchmark.jsonl")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_bench_generate)

    p = bench_sub.add_parser("eval", help="score a backend on the benchmark")
    p.add_argument("--backend", choices=("grammar", "stub", "external"),
                   default="grammar")
    p.add_argument("--benchmark")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_eval)

    p = bench_sub.add_parser("robot", help="planner-only command evaluation")
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--grasp-fail", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_robot)

    p = sub.add_parser("replay", help="re-render a stored trial log")
    p.add_argument("log")
    p.add_argument("--verify", action="store_true",
                   help="re-run the log's inputs and check byte equality")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
