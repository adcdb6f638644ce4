// Trial-plan parsing: one plan_meta header line, then id_set records.

export interface TargetSpec {
  index: number;
  cx: number;
  cy: number;
  w: number;
}

export interface IdSet {
  block: number;
  id: number;
  width: number;
  targets: TargetSpec[];
  words: string[];
}

export interface Plan {
  device: string;
  seed: number;
  ids: number[];
  distance: number;
  blockCount: number;
  sets: IdSet[]; // in presentation order
}

interface PlanHeader {
  device: string;
  seed: number;
  ids: number[];
  distance: number;
  block_count: number;
}

export function parsePlan(text: string): Plan {
  let header: PlanHeader | null = null;
  const sets: IdSet[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new Error(`plan line ${i + 1}: not valid JSON`);
    }
    if (obj.k === "plan_meta") {
      header = obj as unknown as PlanHeader;
    } else if (obj.k === "id_set") {
      const raw = obj as unknown as {
        block: number;
        id: number;
        width: number;
        targets: [number, number, number, number][];
        words: string[];
      };
      sets.push({
        block: raw.block,
        id: raw.id,
        width: raw.width,
        targets: raw.targets.map(([index, cx, cy, w]) => ({ index, cx, cy, w })),
        words: raw.words,
      });
    } else {
      throw new Error(`plan line ${i + 1}: unknown record kind ${String(obj.k)}`);
    }
  }
  if (!header) throw new Error("plan is missing its plan_meta header");
  sets.sort((a, b) => a.block - b.block || 0);
  return {
    device: header.device,
    seed: header.seed,
    ids: header.ids,
    distance: header.distance,
    blockCount: header.block_count,
    sets,
  };
}

export function hitTest(t: TargetSpec, x: number, y: number): boolean {
  const dx = x - t.cx;
  const dy = y - t.cy;
  return dx * dx + dy * dy <= (t.w / 2) * (t.w / 2);
}
