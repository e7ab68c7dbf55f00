// HTML-string renderers over ConsoleState. Pure functions so tests can
// assert on rendered output without a browser.

import { PlanStep, WorldObject } from "./protocol.js";
import { ConsoleState } from "./state.js";

const ZONES = ["countertop", "cabinet", "dishwasher", "table", "counter"];

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBanner(state: ConsoleState): string {
  if (state.connected) {
    return "";
  }
  return '<div class="banner" id="banner">connection lost, retrying…</div>';
}

function chip(obj: WorldObject): string {
  return `<span class="chip chip-${obj.color} chip-${obj.size}" `
    + `data-object="${obj.id}" title="${obj.size} ${obj.color} ${obj.type}">`
    + `${escapeHtml(obj.type)}</span>`;
}

export function renderMap(state: ConsoleState): string {
  if (!state.world) {
    return '<div class="map empty">no world snapshot yet</div>';
  }
  const world = state.world;
  const zones = ZONES.map((zone) => {
    const here = world.objects.filter((o) => o.location === zone);
    const door = world.containers[zone]
      ? ` <span class="door">(${world.containers[zone]})</span>` : "";
    const robot = world.robot.location === zone
      ? '<span class="robot" title="robot">🤖</span>' : "";
    return `<div class="zone zone-${zone}" data-zone="${zone}">`
      + `<h4>${zone}${door}</h4>${robot}${here.map(chip).join("")}</div>`;
  });
  const held = world.objects.find((o) => o.location === "held");
  const holding = held
    ? `<div class="holding">holding: ${chip(held)}</div>` : "";
  return `<div class="map">${zones.join("")}${holding}</div>`;
}

function badge(step: PlanStep): string {
  return step.interruptable
    ? '<span class="badge free" title="interruptable">○</span>'
    : '<span class="badge locked" title="must finish">●</span>';
}

export function renderTimeline(state: ConsoleState): string {
  if (!state.plan) {
    return '<div class="timeline empty">no plan</div>';
  }
  const { steps, cursor, active } = state.plan;
  const items = steps.map((step, i) => {
    const phase = i < cursor ? "done" : i === cursor && active ? "current" : "pending";
    const where = step.location ? ` @${step.location}` : "";
    return `<li class="step ${phase}" data-kind="${step.kind}">`
      + `${badge(step)} ${step.kind}${escapeHtml(where)}</li>`;
  });
  return `<ol class="timeline">${items.join("")}</ol>`;
}

export function renderChat(state: ConsoleState): string {
  const lines = state.chat.map((entry) => {
    const cls = entry.role === "user" ? "user" : `robot ${entry.category ?? ""}`;
    const marks = `${entry.resubmission ? ' <em class="again">(again)</em>' : ""}`
      + `${entry.queued ? ' <em class="queued">queued</em>' : ""}`;
    return `<div class="line ${cls}"><span class="tick">t${entry.tick}</span> `
      + `${escapeHtml(entry.text)}${marks}</div>`;
  });
  return `<div class="chat">${lines.join("")}</div>`;
}

export function renderTicker(state: ConsoleState): string {
  const t = state.ticker;
  const ies = t.transcripts ? (100 * t.corrupted / t.transcripts).toFixed(1) : "0.0";
  return `<div class="ticker">`
    + `<span>mode: <b class="mode-${state.mode}">${state.mode}</b></span>`
    + `<span>tick ${state.tick}</span>`
    + `<span>commands ${t.received}</span>`
    + `<span>executed ${t.executed}</span>`
    + `<span>ignored ${t.ignored}</span>`
    + `<span>repeats ${t.resubmissions}</span>`
    + `<span>garbled ${ies}%</span>`
    + `</div>`;
}

export function renderRobotState(state: ConsoleState): string {
  if (!state.robot) {
    return '<div class="robot-state empty">no state yet</div>';
  }
  const r = state.robot;
  const flags = [
    r.interruptable ? "interruptable" : "locked",
    r.move_base ? "moving" : "",
    r.move_arm ? "arm busy" : "",
  ].filter(Boolean).join(" · ");
  const heading = r.destination_location ? ` → ${r.destination_location}` : "";
  return `<div class="robot-state"><b>${r.step}</b>`
    + ` <span>${r.current_location ?? "?"}${heading}</span>`
    + ` <span class="flags">${flags}</span></div>`;
}

export function renderApp(state: ConsoleState): string {
  const stale = state.connected ? "" : " stale";
  return `${renderBanner(state)}<div class="panels${stale}">`
    + `<section id="map">${renderMap(state)}</section>`
    + `<section id="robot">${renderRobotState(state)}${renderTimeline(state)}</section>`
    + `<section id="chat">${renderChat(state)}</section>`
    + `<footer id="ticker">${renderTicker(state)}</footer>`
    + `</div>`;
}
