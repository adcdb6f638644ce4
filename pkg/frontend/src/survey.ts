// Six-part perceived-discomfort survey, rated 0 (nothing at all) to 10
// (extremely strong). A baseline is collected before the task, a second
// survey after it; the analyzer scores mean(post) - mean(baseline).

import { SurveyRecord } from "./schema.js";

export const BODY_PARTS = ["hand", "wrist", "forearm", "elbow", "upper arm", "shoulder"] as const;

export class Survey {
  private ratings: (number | null)[] = Array(BODY_PARTS.length).fill(null);

  constructor(readonly phase: "baseline" | "post_device") {}

  setRating(part: number, value: number): void {
    if (part < 0 || part >= BODY_PARTS.length) throw new Error(`no body part ${part}`);
    if (!(value >= 0 && value <= 10)) throw new Error(`rating ${value} outside [0, 10]`);
    this.ratings[part] = value;
  }

  get complete(): boolean {
    return this.ratings.every((r) => r !== null);
  }

  toRecord(): SurveyRecord {
    if (!this.complete) throw new Error("survey incomplete: every part needs a rating");
    return { k: "survey", phase: this.phase, ratings: this.ratings.map(Number) };
  }
}
