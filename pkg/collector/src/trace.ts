/**
 * Trace emission in the simulator's on-disk schema: one JSON header line
 * ("name", "t_batch_s", "t_back_s", optional "notes"), then one JSON object
 * per gradient event ("layer", "bytes", "ready_s"), newline separated.
 */

import { writeFileSync } from "node:fs";

import { HookRecord } from "./collector.js";

export function renderTrace(records: HookRecord[], tBatchSeconds: number, name: string): string {
  if (records.length === 0) {
    throw new Error("no hook records to export");
  }
  const maxReady = Math.max(...records.map((r) => r.readySeconds));
  if (maxReady <= 0) {
    throw new Error("all ready times are zero; backward pass too fast to time");
  }
  if (tBatchSeconds < maxReady) {
    throw new Error(
      `t_batch ${tBatchSeconds}s is below the last gradient ready time ${maxReady}s`
    );
  }
  for (const r of records) {
    if (r.readySeconds < 0) throw new Error(`negative ready time for ${r.name}`);
    if (r.sizeBytes <= 0) throw new Error(`parameter ${r.name} has no bytes to send`);
  }

  // backward completion order; registration order breaks ties, output side
  // (higher registration index) first since its gradients finish first
  const ordered = [...records].sort(
    (a, b) => a.readySeconds - b.readySeconds || b.layer - a.layer
  );
  const header: Record<string, unknown> = {
    name,
    t_batch_s: tBatchSeconds,
    t_back_s: maxReady,
    notes: "collected by per-parameter backward hooks; " +
      ordered.map((r, i) => `${i}=${r.name}`).join(" "),
  };
  const lines = [JSON.stringify(header)];
  ordered.forEach((r, i) => {
    lines.push(JSON.stringify({ layer: i, bytes: r.sizeBytes, ready_s: r.readySeconds }));
  });
  return lines.join("\n") + "\n";
}

/** Render and write; validation errors fire before anything hits disk. */
export function exportTrace(
  records: HookRecord[],
  tBatchSeconds: number,
  outPath: string,
  name: string
): void {
  const text = renderTrace(records, tBatchSeconds, name);
  writeFileSync(outPath, text, "utf-8");
}
