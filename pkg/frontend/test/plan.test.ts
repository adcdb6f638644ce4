import { describe, expect, it } from "vitest";

import { hitTest, parsePlan } from "../src/plan.js";

const PLAN_TEXT = [
  '{"k":"plan_meta","device":"trackpad","seed":5,"ids":[3,4,5],"distance":400.0,"block_count":2}',
  '{"k":"id_set","block":1,"id":4,"width":26.67,"targets":[[0,683.0,182.0,26.67]],"words":["water"]}',
  '{"k":"id_set","block":0,"id":3,"width":57.14,"targets":[[0,683.0,182.0,57.14]],"words":["tree"]}',
].join("\n");

describe("plan parsing", () => {
  it("parses header and sets, ordered by block", () => {
    const plan = parsePlan(PLAN_TEXT);
    expect(plan.device).toBe("trackpad");
    expect(plan.blockCount).toBe(2);
    expect(plan.sets.map((s) => s.block)).toEqual([0, 1]);
    expect(plan.sets[0].targets[0]).toEqual({ index: 0, cx: 683.0, cy: 182.0, w: 57.14 });
  });

  it("requires a header", () => {
    expect(() => parsePlan('{"k":"id_set","block":0,"id":3,"width":1,"targets":[],"words":[]}'))
      .toThrow(/plan_meta/);
  });

  it("rejects unknown records and bad json", () => {
    expect(() => parsePlan('{"k":"mystery"}')).toThrow(/unknown record/);
    expect(() => parsePlan("{oops")).toThrow(/not valid JSON/);
  });

  it("hit rule is distance at most half the width", () => {
    const t = { index: 0, cx: 100, cy: 100, w: 40 };
    expect(hitTest(t, 120, 100)).toBe(true);
    expect(hitTest(t, 121, 100)).toBe(false);
    expect(hitTest(t, 100, 100)).toBe(true);
  });
});
