"""Smoke test for the randlab Python bindings.

Build first:
    cargo build --release -p randlab-py --features extension-module
    cp target/release/librandlab_py.so python/randlab_py.so
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import randlab_py as rl

x = rl.BitString("0110")
assert len(x) == 4 and str(x) == "0110"
assert rl.BitString.from_index(x.index()) == x
assert str(rl.BitString.from_index(5)) == "10"
assert str(x.sd1()) == "111100110"
assert rl.unpair(rl.pair("101", "0011")) == (rl.BitString("101"), rl.BitString("0011"))

est = rl.Estimator(max_len=14)
value, witness, fallback = est.upper("0" * 12)
assert value <= 12 + 4, value
cv, _, _ = est.upper("0" * 12, given="0" * 12)
assert cv <= value

levels = {name: level for name, level, _ in rl.test_levels("0" * 16)}
assert levels["leading_zeros"] == 16
assert all(rl.check_axiom(t, 10) for t in ["leading_zeros", "frequency", "odd_positions"])

om = rl.omega(10)
assert 0 < om["value"] < 1 and om["halting"]

order = rl.largest_transitive("1" * 10, 5)
assert len(order) == 5
sample = rl.tourney_sample(8, 200, 1)
assert sample["fraction"] >= 7 / 8

bits, idx = rl.select("suffix(1)", "0110101", None)
assert idx == [3, 4, 6], idx

assert rl.champernowne(10, 15) == "123456789101112"
assert rl.longest_run(rl.prng_bits(1, 4096), False) > 5
assert all(abs(a - 0.5) < 0.05 for _, a in rl.chaos_accuracies(7, 20000))
errs = rl.prediction_errors("bernoulli", 5, 2000)
assert sum(errs) / len(errs) < 1.7

try:
    rl.select("bogus(", "01")
except ValueError as e:
    print("expected error:", e)
else:
    raise AssertionError("bad rule accepted")

print("ok", rl.MACHINE_VERSION, f"omega_10={om['value']:.6f}")
