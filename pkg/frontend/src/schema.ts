// Session log schema: mirrors docs/log-format.md. Field names, units and
// ordering rules here must stay bit-compatible with the Python toolkit.

export const SCREEN_W = 1366;
export const SCREEN_H = 768;

export type Device = "mouse" | "trackpad" | "fingers";
export type Cohort = "novice" | "expert";

export interface SessionMeta {
  participant_id: string;
  device: Device;
  cohort: Cohort;
  block_count: number;
  screen_w: number;
  screen_h: number;
  seed: number;
}

export type InputEvent =
  | { k: "pointer_sample"; t: number; x: number; y: number }
  | { k: "key_down"; t: number; key: string; hand: "tracked" | "untracked" }
  | { k: "key_up"; t: number; key: string }
  | { k: "click"; t: number; x: number; y: number }
  | { k: "mode_switch"; t: number; to: "typing" | "pointing" }
  | { k: "target_shown"; t: number; idx: number; cx: number; cy: number; w: number }
  | { k: "word_shown"; t: number; word: string }
  | { k: "char_typed"; t: number; ch: string };

export interface SurveyRecord {
  k: "survey";
  phase: "baseline" | "post_device";
  ratings: number[]; // exactly 6, each in [0, 10]
}

// JSON.stringify emits shortest round-trip numbers, matching the Python
// encoder's repr() floats, so timestamps survive upload bit-exactly.
export function encodeMeta(meta: SessionMeta): string {
  return JSON.stringify({ k: "meta", ...meta });
}

export function encodeEvent(e: InputEvent): string {
  return JSON.stringify(e);
}

export function encodeSurvey(s: SurveyRecord): string {
  return JSON.stringify(s);
}

export function serializeSession(
  meta: SessionMeta,
  events: InputEvent[],
  surveys: SurveyRecord[],
): string {
  const lines = [encodeMeta(meta)];
  for (const e of events) lines.push(encodeEvent(e));
  for (const s of surveys) lines.push(encodeSurvey(s));
  return lines.join("\n") + "\n";
}

export interface Violation {
  rule: string;
  index: number;
  message: string;
}

// Client-side pre-upload check: the same rules the server enforces.
export function validateSession(
  meta: SessionMeta,
  events: InputEvent[],
): Violation[] {
  const out: Violation[] = [];
  let prevT = -1;
  events.forEach((e, i) => {
    if (e.t < prevT) {
      out.push({ rule: "non_monotone_timestamp", index: i, message: `t=${e.t} before ${prevT}` });
    }
    prevT = Math.max(prevT, e.t);
    if (e.k === "target_shown" && !(e.w > 0)) {
      out.push({ rule: "nonpositive_target_width", index: i, message: `w=${e.w}` });
    }
    if (e.k === "pointer_sample" || e.k === "click") {
      if (e.x < 0 || e.x > meta.screen_w || e.y < 0 || e.y > meta.screen_h) {
        out.push({ rule: "pointer_out_of_bounds", index: i, message: `(${e.x}, ${e.y})` });
      }
    }
  });
  return out;
}

export function clampToScreen(x: number, y: number): [number, number] {
  return [Math.min(Math.max(x, 0), SCREEN_W), Math.min(Math.max(y, 0), SCREEN_H)];
}
