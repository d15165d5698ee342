/**
 * A small dense network with hand-written backprop.
 *
 * This stands in for the "real training loop" being instrumented: the point
 * is not the model but that gradients for each parameter finish at distinct,
 * measurable moments during the backward pass. Each parameter fires its
 * gradient hook at the instant its grad buffer is fully written, which is
 * exactly what the trace collector timestamps.
 */

export const FLOAT32_BYTES = 4;

export type GradHook = (param: Parameter) => void;

export class Parameter {
  readonly name: string;
  readonly data: Float32Array;
  readonly requiresGrad: boolean;
  grad: Float32Array | null = null;
  gradHook: GradHook | null = null;

  constructor(name: string, size: number, requiresGrad: boolean, rng: () => number) {
    this.name = name;
    this.requiresGrad = requiresGrad;
    this.data = new Float32Array(size);
    const scale = 1 / Math.sqrt(size);
    for (let i = 0; i < size; i++) this.data[i] = (rng() * 2 - 1) * scale;
  }

  get sizeBytes(): number {
    return this.data.length * FLOAT32_BYTES;
  }

  /** Called by the backward pass once this parameter's grad is complete. */
  gradReady(grad: Float32Array): void {
    if (!this.requiresGrad) return;
    this.grad = grad;
    if (this.gradHook) this.gradHook(this);
  }
}

export interface LayerSpec {
  inDim: number;
  outDim: number;
  frozen?: boolean;
}

interface ForwardCache {
  input: Float32Array; // [batch, inDim]
  preAct: Float32Array; // [batch, outDim], before ReLU
}

class Linear {
  readonly weight: Parameter; // [outDim, inDim], row-major
  readonly bias: Parameter;
  readonly inDim: number;
  readonly outDim: number;
  readonly relu: boolean;

  constructor(index: number, spec: LayerSpec, relu: boolean, rng: () => number) {
    this.inDim = spec.inDim;
    this.outDim = spec.outDim;
    this.relu = relu;
    const trainable = !spec.frozen;
    this.weight = new Parameter(`layers.${index}.weight`, spec.outDim * spec.inDim, trainable, rng);
    this.bias = new Parameter(`layers.${index}.bias`, spec.outDim, trainable, rng);
  }

  forward(input: Float32Array, batch: number): { out: Float32Array; cache: ForwardCache } {
    const { inDim, outDim } = this;
    const pre = new Float32Array(batch * outDim);
    for (let b = 0; b < batch; b++) {
      for (let o = 0; o < outDim; o++) {
        let acc = this.bias.data[o];
        const wRow = o * inDim;
        const xRow = b * inDim;
        for (let i = 0; i < inDim; i++) acc += this.weight.data[wRow + i] * input[xRow + i];
        pre[b * outDim + o] = acc;
      }
    }
    let out = pre;
    if (this.relu) {
      out = new Float32Array(pre.length);
      for (let i = 0; i < pre.length; i++) out[i] = pre[i] > 0 ? pre[i] : 0;
    }
    return { out, cache: { input, preAct: pre } };
  }

  /**
   * Backprop through this layer. Finalizes weight grad first, then bias,
   * then returns the gradient w.r.t. the input; hooks fire as each
   * parameter's grad completes.
   */
  backward(gradOut: Float32Array, cache: ForwardCache, batch: number): Float32Array {
    const { inDim, outDim } = this;
    let dPre = gradOut;
    if (this.relu) {
      dPre = new Float32Array(gradOut.length);
      for (let i = 0; i < gradOut.length; i++) dPre[i] = cache.preAct[i] > 0 ? gradOut[i] : 0;
    }

    const dW = new Float32Array(outDim * inDim);
    for (let b = 0; b < batch; b++) {
      const xRow = b * inDim;
      for (let o = 0; o < outDim; o++) {
        const g = dPre[b * outDim + o];
        if (g === 0) continue;
        const wRow = o * inDim;
        for (let i = 0; i < inDim; i++) dW[wRow + i] += g * cache.input[xRow + i];
      }
    }
    this.weight.gradReady(dW);

    const dB = new Float32Array(outDim);
    for (let b = 0; b < batch; b++) {
      for (let o = 0; o < outDim; o++) dB[o] += dPre[b * outDim + o];
    }
    this.bias.gradReady(dB);

    const dX = new Float32Array(batch * inDim);
    for (let b = 0; b < batch; b++) {
      const xRow = b * inDim;
      for (let o = 0; o < outDim; o++) {
        const g = dPre[b * outDim + o];
        if (g === 0) continue;
        const wRow = o * inDim;
        for (let i = 0; i < inDim; i++) dX[xRow + i] += g * this.weight.data[wRow + i];
      }
    }
    return dX;
  }
}

/** Deterministic float rng in [0, 1); mulberry32. */
export function seededRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class ToyMlp {
  readonly layers: Linear[];
  readonly inDim: number;
  readonly outDim: number;
  instrumented = false;
  private caches: ForwardCache[] = [];

  constructor(specs: LayerSpec[], rng: () => number = seededRng(1234)) {
    if (specs.length === 0) throw new Error("model needs at least one layer");
    for (let i = 1; i < specs.length; i++) {
      if (specs[i].inDim !== specs[i - 1].outDim) {
        throw new Error(`layer ${i} input dim ${specs[i].inDim} != previous output ${specs[i - 1].outDim}`);
      }
    }
    // ReLU everywhere except the output layer
    this.layers = specs.map((s, i) => new Linear(i, s, i < specs.length - 1, rng));
    this.inDim = specs[0].inDim;
    this.outDim = specs[specs.length - 1].outDim;
  }

  parameters(): Parameter[] {
    return this.layers.flatMap((l) => [l.weight, l.bias]);
  }

  forward(input: Float32Array, batch: number): Float32Array {
    this.caches = [];
    let cur = input;
    for (const layer of this.layers) {
      const { out, cache } = layer.forward(cur, batch);
      this.caches.push(cache);
      cur = out;
    }
    return cur;
  }

  /** MSE loss against target; returns the scalar loss. */
  loss(output: Float32Array, target: Float32Array): number {
    let acc = 0;
    for (let i = 0; i < output.length; i++) {
      const d = output[i] - target[i];
      acc += d * d;
    }
    return acc / output.length;
  }

  /** Backward from MSE loss. Walks layers output-to-input, firing hooks. */
  backward(output: Float32Array, target: Float32Array, batch: number): void {
    if (this.caches.length !== this.layers.length) {
      throw new Error("backward called before forward");
    }
    let grad: Float32Array = new Float32Array(output.length);
    for (let i = 0; i < output.length; i++) {
      grad[i] = (2 * (output[i] - target[i])) / output.length;
    }
    for (let i = this.layers.length - 1; i >= 0; i--) {
      grad = this.layers[i].backward(grad, this.caches[i], batch);
    }
  }

  /** Plain SGD over trainable parameters; clears grads afterwards. */
  sgdStep(lr: number): void {
    for (const p of this.parameters()) {
      if (!p.requiresGrad || p.grad === null) continue;
      for (let i = 0; i < p.data.length; i++) p.data[i] -= lr * p.grad[i];
      p.grad = null;
    }
  }
}

// Dimensions give each layer enough multiply work that per-parameter
// gradient completion times are well above timer resolution.
export const DEFAULT_SPECS: LayerSpec[] = [
  { inDim: 64, outDim: 128 },
  { inDim: 128, outDim: 128 },
  { inDim: 128, outDim: 10 },
];

export const DEFAULT_BATCH = 32;
