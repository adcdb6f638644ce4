// Upload to the collection server; fire-and-confirm with bounded retry.

export interface UploadResult {
  ok: boolean;
  status: number;
  detail: string;
}

export async function fetchPlan(base: string, device: string, seed: number, blocks: number): Promise<string> {
  const res = await fetch(`${base}/plan?device=${device}&seed=${seed}&blocks=${blocks}`);
  if (!res.ok) throw new Error(`plan request failed: HTTP ${res.status}`);
  return res.text();
}

export async function postSession(base: string, body: string, retries = 2): Promise<UploadResult> {
  let last: UploadResult = { ok: false, status: 0, detail: "not attempted" };
  for (let attempt = 0; attempt <= retries; attempt++) {
    try {
      const res = await fetch(`${base}/session`, {
        method: "POST",
        headers: { "Content-Type": "application/x-ndjson" },
        body,
      });
      const text = await res.text();
      last = { ok: res.ok, status: res.status, detail: text };
      if (res.ok || res.status === 400 || res.status === 422) return last; // don't retry rejections
    } catch (err) {
      last = { ok: false, status: 0, detail: String(err) };
    }
  }
  return last;
}
