"""Regenerate the bundled model profiles from the layer tables.

Run from the repo root after editing DEFAULT_PROFILE_TIMINGS or the layer
tables: python3 scripts/make_profiles.py
"""

import pathlib

from scaleout.trace import DEFAULT_PROFILE_TIMINGS, serialize_trace, synth_profile

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "src/scaleout/data/profiles"

NOTES = (
    "bundled profile: V100-class fp32 single-GPU timing at batch 32 "
    "(~{rate:.0f} images/s); per-layer sizes pinned to published totals; "
    "ready times spread by relative backward compute cost"
)

BATCH_SIZE = 32


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for model, (t_batch, t_back) in DEFAULT_PROFILE_TIMINGS.items():
        trace = synth_profile(model, t_batch, t_back)
        path = OUT_DIR / f"{model}.trace"
        notes = NOTES.format(rate=BATCH_SIZE / t_batch)
        path.write_text(serialize_trace(trace, notes=notes), encoding="utf-8")
        print(f"{path}: {len(trace.events)} events, {trace.total_bytes} bytes")


if __name__ == "__main__":
    main()
