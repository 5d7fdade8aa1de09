#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds nothing itself: it locates the compiled extension under target/,
stages it in a temporary directory under the importable name, and then
exercises the module end to end (arithmetic, transforms, grading, and
netlist round-trips). Run from anywhere after `cargo build -p revdft-py`:

    python3 python/smoke_test.py
"""

import pathlib
import shutil
import sys
import tempfile


def stage_module(workdir: pathlib.Path) -> None:
    """Copy the built cdylib into workdir under its import name."""
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("librevdft.so", "librevdft.dylib", "revdft.dll")
    ]
    built = [path for path in candidates if path.exists()]
    if not built:
        sys.exit("extension not built; run `cargo build -p revdft-py` first")
    newest = max(built, key=lambda path: path.stat().st_mtime)
    suffix = ".pyd" if newest.suffix == ".dll" else ".so"
    shutil.copy2(newest, workdir / f"revdft{suffix}")


def main() -> None:
    with tempfile.TemporaryDirectory() as staged:
        stage_module(pathlib.Path(staged))
        sys.path.insert(0, staged)
        import revdft

        # a full adder computes: wires a, b, cin, anc; sum on cin, carry on anc
        fa = revdft.dpe("fa")
        assert fa.width == 4 and fa.gate_count == 4
        assert fa.line_names() == ["a", "b", "cin", "anc"]
        for a in range(2):
            for b in range(2):
                for cin in range(2):
                    out = fa.run(f"{a}{b}{cin}0")
                    total = a + b + cin
                    assert int(out[2]) == total & 1, (a, b, cin, out)
                    assert int(out[3]) == total >> 1, (a, b, cin, out)

        report = fa.cost_report()
        assert report == {
            "wires": 4,
            "gate_cost": 4,
            "quantum_cost": 12,
            "constant_inputs": 1,
            "garbage_outputs": 2,
        }, report

        # netlist round-trip and inversion
        again = revdft.Circuit.from_tfc(fa.to_tfc())
        assert again == fa
        state = "1101"
        assert fa.inverse().run(fa.run(state)) == state
        trace = fa.run_traced(state)
        assert len(trace) == fa.gate_count + 1
        assert trace[0] == state and trace[-1] == fa.run(state)

        # concurrent checking: instrument, then grade the designed universe
        checked = revdft.transform(fa, "online-mct")
        assert checked.width == fa.width + 2
        assert checked.gate_count == 2 * fa.gate_count + 2 * (fa.width + 1)
        graded = revdft.grade(checked, "bit-flip")
        assert graded["coverage"] == 1.0, graded
        assert graded["designed_universe"] is True
        assert graded["undetected"] == []

        # blocking test mode: uniform pair catches every stuck-at
        blocked = revdft.transform(fa, "offline-mct")
        graded = revdft.grade(blocked, "stuck-at")
        assert graded["coverage"] == 1.0, graded
        assert graded["rule"] == "identity"

        # an unmodified circuit graded with the same pair stays partial
        graded = revdft.grade(fa, "stuck-at")
        assert graded["coverage"] < 1.0
        assert graded["undetected"], "expected surviving faults"

        # fixed vector families
        assert revdft.gts(3, "stuck2") == ["000", "110"]
        assert len(revdft.gts(5, "pairs")) == 6
        try:
            revdft.gts(2, "pairs")
        except ValueError:
            pass
        else:
            raise AssertionError("undersized family request must fail")

        # generated elements verify against integer arithmetic; the product
        # sits on the declared output wires, low bit first
        mul = revdft.dpe("mul4")
        outputs = next(
            line for line in mul.to_tfc().splitlines() if line.startswith(".o ")
        )
        names = mul.line_names()
        product_wires = [names.index(n) for n in outputs[3:].split(",")]
        for a, b in [(3, 5), (15, 15), (7, 9), (11, 13)]:
            bits = f"{a:04b}"[::-1] + f"{b:04b}"[::-1] + "0" * (mul.width - 8)
            out = mul.run(bits)
            product = sum(int(out[w]) << i for i, w in enumerate(product_wires))
            assert product == a * b, (a, b, product)

    print("smoke test passed")


if __name__ == "__main__":
    main()
