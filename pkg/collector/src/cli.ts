#!/usr/bin/env node
/** collect --iters 10 --warmup 3 -o model.trace */

import { parseArgs } from "node:util";

import { runCollection } from "./run.js";
import { exportTrace } from "./trace.js";

const USAGE = `usage: collector collect --iters N --warmup N -o FILE [--name NAME] [--seed N]

Runs the bundled instrumented training loop and writes a gradient trace.

  --iters N    measured iterations to average over (default 10)
  --warmup N   iterations discarded before measuring (default 3)
  -o, --out    output trace path (required)
  --name NAME  model name stamped into the trace (default toy-mlp)
  --seed N     rng seed for weights and data (default 1234)
`;

function usageError(message: string): never {
  process.stderr.write(`error: ${message}\n\n${USAGE}`);
  process.exit(2);
}

function intFlag(raw: string | undefined, fallback: number, label: string): number {
  if (raw === undefined) return fallback;
  const v = Number(raw);
  if (!Number.isInteger(v)) usageError(`${label} must be an integer, got '${raw}'`);
  return v;
}

function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        iters: { type: "string" },
        warmup: { type: "string" },
        out: { type: "string", short: "o" },
        name: { type: "string" },
        seed: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    });
  } catch (err) {
    usageError((err as Error).message);
  }
  if (parsed.values.help) {
    process.stdout.write(USAGE);
    return 0;
  }
  if (parsed.positionals.length !== 1 || parsed.positionals[0] !== "collect") {
    usageError("expected exactly one command: collect");
  }
  if (!parsed.values.out) {
    usageError("missing required -o/--out");
  }

  const iters = intFlag(parsed.values.iters, 10, "--iters");
  const warmup = intFlag(parsed.values.warmup, 3, "--warmup");
  const seed = intFlag(parsed.values.seed, 1234, "--seed");
  const name = parsed.values.name ?? "toy-mlp";

  const result = runCollection({ iters, warmup, seed, name });
  exportTrace(result.records, result.tBatchSeconds, parsed.values.out, result.name);
  const totalBytes = result.records.reduce((a, r) => a + r.sizeBytes, 0);
  console.log(
    `wrote ${parsed.values.out}: ${result.records.length} events, ${totalBytes} bytes, ` +
      `t_batch=${result.tBatchSeconds}s (${iters} iters after ${warmup} warmup, ` +
      `final loss ${result.finalLoss.toFixed(6)})`
  );
  return 0;
}

try {
  process.exit(main(process.argv.slice(2)));
} catch (err) {
  process.stderr.write(`error: ${(err as Error).message}\n`);
  process.exit(1);
}
