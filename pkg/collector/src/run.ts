/** The instrumented training loop the collector ships with. */

import { performance } from "node:perf_hooks";

import { HookRecord, TraceCollector, attachHooks } from "./collector.js";
import { DEFAULT_BATCH, DEFAULT_SPECS, LayerSpec, ToyMlp, seededRng } from "./model.js";

export interface CollectOptions {
  iters: number; // measured iterations
  warmup: number; // discarded iterations before measurement
  seed?: number;
  name?: string;
  specs?: LayerSpec[];
  batch?: number;
}

export interface CollectResult {
  records: HookRecord[];
  tBatchSeconds: number;
  name: string;
  finalLoss: number;
}

export function runCollection(opts: CollectOptions): CollectResult {
  if (!Number.isInteger(opts.iters) || opts.iters < 1) {
    throw new Error(`iters must be a positive integer, got ${opts.iters}`);
  }
  if (!Number.isInteger(opts.warmup) || opts.warmup < 0) {
    throw new Error(`warmup must be a non-negative integer, got ${opts.warmup}`);
  }
  const specs = opts.specs ?? DEFAULT_SPECS;
  const batch = opts.batch ?? DEFAULT_BATCH;
  const rng = seededRng(opts.seed ?? 1234);
  const model = new ToyMlp(specs, rng);
  const collector = new TraceCollector();
  attachHooks(model, collector);

  const input = new Float32Array(batch * model.inDim);
  const target = new Float32Array(batch * model.outDim);
  for (let i = 0; i < input.length; i++) input[i] = rng() * 2 - 1;
  for (let i = 0; i < target.length; i++) target[i] = rng() * 2 - 1;

  let finalLoss = Number.NaN;
  const total = opts.warmup + opts.iters;
  for (let it = 0; it < total; it++) {
    const measured = it >= opts.warmup;
    const t0 = performance.now();
    const out = model.forward(input, batch);
    finalLoss = model.loss(out, target);
    collector.beginBackward(measured);
    model.backward(out, target, batch);
    model.sgdStep(0.01);
    if (measured) collector.addIterationTime((performance.now() - t0) / 1000);
  }

  return {
    records: collector.records(),
    tBatchSeconds: collector.meanIterationSeconds(),
    name: opts.name ?? "toy-mlp",
    finalLoss,
  };
}
