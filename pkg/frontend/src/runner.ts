// Task state machine: show target -> await a hit -> show word -> await the
// typed word -> next target. Pure logic; the DOM layer feeds it pointer and
// key input and renders whatever `current()` says. All captured events go
// through one monotone clock so the buffer is valid by construction.

import { hitTest, IdSet, Plan, TargetSpec } from "./plan.js";
import {
  clampToScreen,
  Cohort,
  Device,
  InputEvent,
  SessionMeta,
  serializeSession,
  SurveyRecord,
  validateSession,
  Violation,
  SCREEN_W,
  SCREEN_H,
} from "./schema.js";

export type Phase = "awaiting_click" | "typing_word" | "done";

export interface RunnerView {
  phase: Phase;
  set: IdSet | null;
  target: TargetSpec | null;
  word: string | null;
  typed: string;
  setIndex: number;
  setCount: number;
  targetIndex: number;
  block: number;
}

export interface TaskStats {
  hits: number;
  misses: number;
  wordsTyped: number;
}

export class TaskRunner {
  readonly events: InputEvent[] = [];
  readonly stats: TaskStats = { hits: 0, misses: 0, wordsTyped: 0 };
  invalidReason: string | null = null;
  onAdvance: (() => void) | null = null;
  onBlockDone: ((block: number) => void) | null = null;
  onDone: (() => void) | null = null;

  private phase: Phase = "awaiting_click";
  private setIdx = 0;
  private targetIdx = 0;
  private typed = "";
  private lastT = 0;

  constructor(
    private readonly plan: Plan,
    private readonly clock: () => number,
    private readonly participantId: string,
    private readonly cohort: Cohort,
  ) {
    if (plan.sets.length === 0) throw new Error("empty plan");
    this.record({ k: "target_shown", t: this.now(), ...this.targetFields() });
  }

  current(): RunnerView {
    const set = this.phase === "done" ? null : this.plan.sets[this.setIdx];
    const target = set && this.phase === "awaiting_click" ? set.targets[this.targetIdx] : null;
    const word = set && this.phase === "typing_word" ? set.words[this.targetIdx] : null;
    return {
      phase: this.phase,
      set,
      target,
      word,
      typed: this.typed,
      setIndex: this.setIdx,
      setCount: this.plan.sets.length,
      targetIndex: this.targetIdx,
      block: set ? set.block : -1,
    };
  }

  pointerMove(x: number, y: number): void {
    if (this.phase === "done") return;
    const [cx, cy] = clampToScreen(x, y);
    this.record({ k: "pointer_sample", t: this.now(), x: cx, y: cy });
  }

  pointerClick(x: number, y: number): void {
    if (this.phase === "done") return;
    const [cx, cy] = clampToScreen(x, y);
    const t = this.now();
    this.record({ k: "click", t, x: cx, y: cy });
    if (this.phase !== "awaiting_click") return;
    const target = this.plan.sets[this.setIdx].targets[this.targetIdx];
    if (!hitTest(target, cx, cy)) {
      this.stats.misses += 1; // the target persists until hit
      return;
    }
    this.stats.hits += 1;
    const set = this.plan.sets[this.setIdx];
    if (this.targetIdx < set.words.length) {
      this.phase = "typing_word";
      this.typed = "";
      this.record({ k: "word_shown", t: this.now(), word: set.words[this.targetIdx] });
    } else {
      this.advanceSet();
    }
    this.onAdvance?.();
  }

  keyInput(ch: string): void {
    if (this.phase !== "typing_word") return;
    const t = this.now();
    if (ch === "Backspace" || ch === "\b") {
      this.record({ k: "char_typed", t, ch: "\b" });
      this.typed = this.typed.slice(0, -1);
      return;
    }
    if (ch.length !== 1) return; // modifier or function key
    this.record({ k: "char_typed", t, ch });
    this.typed += ch;
    const word = this.plan.sets[this.setIdx].words[this.targetIdx];
    if (this.typed === word) {
      this.stats.wordsTyped += 1;
      this.targetIdx += 1;
      this.phase = "awaiting_click";
      this.record({ k: "target_shown", t: this.now(), ...this.targetFields() });
      this.onAdvance?.();
    }
  }

  invalidate(reason: string): void {
    if (!this.invalidReason) this.invalidReason = reason;
  }

  get done(): boolean {
    return this.phase === "done";
  }

  meta(): SessionMeta {
    const maxBlock = this.plan.sets.reduce((m, s) => Math.max(m, s.block), 0);
    return {
      participant_id: this.participantId,
      device: this.plan.device as Device,
      cohort: this.cohort,
      block_count: maxBlock + 1,
      screen_w: SCREEN_W,
      screen_h: SCREEN_H,
      seed: this.plan.seed,
    };
  }

  validate(): Violation[] {
    return validateSession(this.meta(), this.events);
  }

  serialize(surveys: SurveyRecord[]): string {
    return serializeSession(this.meta(), this.events, surveys);
  }

  private targetFields() {
    const target = this.plan.sets[this.setIdx].targets[this.targetIdx];
    return { idx: target.index, cx: target.cx, cy: target.cy, w: target.w };
  }

  private advanceSet(): void {
    const finishedBlock = this.plan.sets[this.setIdx].block;
    this.setIdx += 1;
    this.targetIdx = 0;
    this.typed = "";
    if (this.setIdx >= this.plan.sets.length) {
      this.phase = "done";
      this.onBlockDone?.(finishedBlock);
      this.onDone?.();
      return;
    }
    if (this.plan.sets[this.setIdx].block !== finishedBlock) {
      this.onBlockDone?.(finishedBlock);
    }
    this.phase = "awaiting_click";
    this.record({ k: "target_shown", t: this.now(), ...this.targetFields() });
  }

  private now(): number {
    // high-resolution clock, clamped monotone so the log stays valid even
    // if the host clock misbehaves
    const t = Math.max(this.clock(), this.lastT);
    this.lastT = t;
    return t;
  }

  private record(e: InputEvent): void {
    this.events.push(e);
  }
}
