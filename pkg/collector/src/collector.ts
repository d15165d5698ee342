/**
 * Hook attachment and ready-time aggregation.
 *
 * Timestamps are host-side, taken the moment a gradient hook runs; with an
 * async device the kernel may still be in flight, so treat the numbers as
 * approximate. Averaging over several warm iterations (after discarding
 * warm-up) smooths scheduler jitter.
 */

import { performance } from "node:perf_hooks";

import { Parameter, ToyMlp } from "./model.js";

export interface HookRecord {
  name: string;
  layer: number;
  sizeBytes: number;
  readySeconds: number; // relative to backward start
}

export function attachHooks(model: ToyMlp, collector: TraceCollector): ToyMlp {
  if (model.instrumented) {
    throw new Error("already instrumented");
  }
  model.parameters().forEach((p, index) => {
    if (!p.requiresGrad) {
      console.warn(`warning: parameter ${p.name} takes no gradient, skipping`);
      return;
    }
    collector.register(p, index);
    p.gradHook = (param: Parameter) => collector.onGradReady(param);
  });
  model.instrumented = true;
  return model;
}

interface ParamStats {
  layer: number;
  sizeBytes: number;
  totalSeconds: number;
  samples: number;
}

export class TraceCollector {
  private stats = new Map<string, ParamStats>();
  private iterationSeconds: number[] = [];
  private backwardStart = 0;
  private recording = false;

  register(param: Parameter, layer: number): void {
    if (this.stats.has(param.name)) {
      throw new Error(`parameter ${param.name} registered twice`);
    }
    this.stats.set(param.name, {
      layer,
      sizeBytes: param.sizeBytes,
      totalSeconds: 0,
      samples: 0,
    });
  }

  /** Start timing one backward pass; record=false for warm-up iterations. */
  beginBackward(record: boolean): void {
    this.recording = record;
    this.backwardStart = performance.now();
  }

  onGradReady(param: Parameter): void {
    if (!this.recording) return;
    const stat = this.stats.get(param.name);
    if (!stat) return; // hook on a parameter registered elsewhere
    stat.totalSeconds += (performance.now() - this.backwardStart) / 1000;
    stat.samples += 1;
  }

  addIterationTime(seconds: number): void {
    this.iterationSeconds.push(seconds);
  }

  get recordedIterations(): number {
    return this.iterationSeconds.length;
  }

  /** Mean wall time of one full training iteration, in seconds. */
  meanIterationSeconds(): number {
    if (this.iterationSeconds.length === 0) {
      throw new Error("no iterations recorded");
    }
    const total = this.iterationSeconds.reduce((a, b) => a + b, 0);
    return total / this.iterationSeconds.length;
  }

  /** Per-parameter records with ready times averaged across iterations. */
  records(): HookRecord[] {
    const out: HookRecord[] = [];
    for (const [name, s] of this.stats) {
      if (s.samples === 0) continue; // registered but never fired
      out.push({
        name,
        layer: s.layer,
        sizeBytes: s.sizeBytes,
        readySeconds: s.totalSeconds / s.samples,
      });
    }
    return out;
  }
}
