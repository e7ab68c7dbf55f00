// Browser entry point: bind the gateway client to the DOM.

import { GatewayClient } from "./client.js";
import { renderApp } from "./render.js";
import { applyFrame, ConsoleState, initialState } from "./state.js";

const params = new URLSearchParams(location.search);
const url = params.get("gateway")
  ?? `ws://${location.hostname || "127.0.0.1"}:${params.get("port") ?? "8765"}`;

const state: ConsoleState = initialState();
const app = document.getElementById("app") as HTMLElement;
const input = document.getElementById("utterance") as HTMLInputElement;
const stopButton = document.getElementById("stop") as HTMLButtonElement;
const resetButton = document.getElementById("reset") as HTMLButtonElement;
const ageSelect = document.getElementById("age") as HTMLSelectElement;

let dirty = false;
function repaint(): void {
  if (dirty) {
    return;
  }
  dirty = true;
  requestAnimationFrame(() => {
    dirty = false;
    app.innerHTML = renderApp(state);
    const chat = document.querySelector("#chat .chat");
    if (chat) {
      chat.scrollTop = chat.scrollHeight;
    }
    // the stop button stays live for the whole execution window
    stopButton.disabled = !state.connected || state.mode !== "executing";
    resetButton.disabled = !state.connected || state.mode !== "stopped";
    input.disabled = !state.connected;
  });
}

const client = new GatewayClient(url, {
  onFrame: (env) => {
    applyFrame(state, env);
    repaint();
  },
  onStatus: (connected) => {
    state.connected = connected;
    repaint();
  },
});

input.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter" && input.value.trim()) {
    client.sendUtterance(input.value.trim());
    input.value = "";
  }
});
stopButton.addEventListener("click", () => client.sendStop());
resetButton.addEventListener("click", () => client.sendReset());
ageSelect.addEventListener("change", () => client.setAge(ageSelect.value));

client.connect();
repaint();
