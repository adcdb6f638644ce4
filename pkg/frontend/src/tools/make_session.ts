// Synthetic driver: reads a plan (JSONL) on stdin, walks the task state
// machine like a careful human, and writes the session log to stdout.
// Used by the cross-language contract test against the Python validator.

import { parsePlan } from "../plan.js";
import { TaskRunner } from "../runner.js";
import { Survey } from "../survey.js";

declare const process: {
  stdin: { fd: number };
  stdout: { write(s: string): void };
  argv: string[];
  exit(code: number): void;
};

import { readFileSync } from "node:fs";

function main(): void {
  const text = readFileSync(0, "utf-8");
  const plan = parsePlan(text);

  let t = 0.0;
  const clock = () => t;
  const runner = new TaskRunner(plan, clock, "webtest", "novice");

  let pos: [number, number] = [683, 384];
  const steps = 24;
  while (!runner.done) {
    const view = runner.current();
    if (view.phase === "awaiting_click" && view.target) {
      t += 0.25; // reaction before moving
      const from: [number, number] = [...pos];
      for (let i = 1; i <= steps; i++) {
        t += 1.0 / 120;
        const f = i / steps;
        runner.pointerMove(
          from[0] + f * (view.target.cx - from[0]),
          from[1] + f * (view.target.cy - from[1]),
        );
      }
      pos = [view.target.cx, view.target.cy];
      t += 0.02;
      runner.pointerClick(pos[0], pos[1]);
    } else if (view.phase === "typing_word" && view.word) {
      t += 0.3; // return to the keyboard
      for (const ch of view.word) {
        runner.keyInput(ch);
        t += 0.05;
      }
    } else {
      break;
    }
  }

  const baseline = new Survey("baseline");
  const post = new Survey("post_device");
  for (let i = 0; i < 6; i++) {
    baseline.setRating(i, 0);
    post.setRating(i, i % 2);
  }
  process.stdout.write(runner.serialize([baseline.toRecord(), post.toRecord()]));
  const violations = runner.validate();
  if (violations.length > 0) {
    throw new Error(`generated session has ${violations.length} violations`);
  }
}

main();
