// Viewport mapping: the task runs on a fixed 1366x768 logical canvas,
// letterboxed into whatever window the tester has. Mapping goes through
// CSS pixels (getBoundingClientRect coordinates), so the logged logical
// position is independent of device-pixel-ratio and browser zoom.

import { SCREEN_W, SCREEN_H } from "./schema.js";

export interface Letterbox {
  scale: number;   // logical px -> CSS px
  offsetX: number; // CSS px of the logical origin within the viewport box
  offsetY: number;
}

export function computeLetterbox(viewW: number, viewH: number): Letterbox {
  const scale = Math.min(viewW / SCREEN_W, viewH / SCREEN_H);
  return {
    scale,
    offsetX: (viewW - SCREEN_W * scale) / 2,
    offsetY: (viewH - SCREEN_H * scale) / 2,
  };
}

export function toLogical(box: Letterbox, cssX: number, cssY: number): [number, number] {
  return [(cssX - box.offsetX) / box.scale, (cssY - box.offsetY) / box.scale];
}

export function toCss(box: Letterbox, lx: number, ly: number): [number, number] {
  return [box.offsetX + lx * box.scale, box.offsetY + ly * box.scale];
}

export function insideLogical(x: number, y: number): boolean {
  return x >= 0 && x <= SCREEN_W && y >= 0 && y <= SCREEN_H;
}

// the window must be large enough that targets are not scaled away
export const MIN_VIEW_W = 820;
export const MIN_VIEW_H = 480;

export function viewportTooSmall(viewW: number, viewH: number): boolean {
  return viewW < MIN_VIEW_W || viewH < MIN_VIEW_H;
}
