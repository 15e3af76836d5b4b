"""Time the seal/unseal pipeline across model sizes and fit the trend.

Runs a scaled-down benchmark (small sizes so the demo finishes in a few
seconds), prints the median table, and fits total seal time and decrypt
time against size. Run directly:

    python3 demos/bench_demo.py

For the full default sizes use the CLI, which also writes bench.md and
bench.csv:

    mvc bench --reps 5
"""

from modelvault import (KeyMaterial, emit_table, fit_linear, format_fit,
                        run_bench)

# ---------------------------------------------------------------------
# Four sizes, three repetitions each (plus a discarded warm-up round).
# Repetitions interleave across sizes and the reported numbers are
# per-phase medians, so one scheduler hiccup does not tilt the line.
records = run_bench(sizes_mb=(0.5, 1.0, 2.0, 4.0),
                    key=KeyMaterial.generate(), repetitions=3)

print(emit_table(records, "markdown"))

# ---------------------------------------------------------------------
# Ordinary least squares of time against size. Encryption and
# decryption cost should grow close to linearly with model size; the
# r^2 says how close this machine got.
for metric in ("total_seal_ms", "decrypt_ms"):
    print(format_fit(fit_linear(records, metric), metric))
