"""Acceptance criteria.  Each test prints one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary.  ``python3 tests/test_acceptance.py``
runs the same checks without pytest.
"""

import io
import random
import time
from pathlib import Path

import numpy as np

from ettx.cli import main as cli_main
from ettx.compile import EtProgram, et_evaluate
from ettx.compose import Subrun, compose_nsst, subrun_mul, summarize_assign, unsummarize
from ettx.core import Bag, parse_refword
from ettx.ecsa import Ecsa
from ettx.evaluation import evaluate
from ettx.fixtures import (RUNNING_DOC, SINGER_NAMES, SINGERS, e1, running_tuple, running_expr,
                           garbage_nsst, t1)
from ettx.oracle import compose_bag, enumerate_tuples, et_bag, garbage_free_by_runs, nsst_bag
from ettx.sst import (Assignment, Reg, compose_assign, dsst_run, garbage_free_transform, is_copyless,
                      is_garbage_free, nsst_to_et)
from ettx.testing import (EcsaDriver, random_dsst, random_expr, random_gf_nsst, random_image, random_nsst,
                          split_regs, words)

DATA = Path(__file__).parent / "data"
RESULTS = []


def report(cid, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# -- 1 ---------------------------------------------------------------------


def test_c01_singers():
    t = time.perf_counter()
    p = EtProgram(e1(), t1(), alphabet=set(SINGERS))
    outs = list(et_evaluate(p, SINGERS))
    dt = time.perf_counter() - t
    bag = Bag(outs)
    ok = bag == Bag(SINGER_NAMES) and bag.mult("Neil Young") == 2 and dt < 1.0
    report(1, ok, f"{len(outs)} outputs, equal to the 12-name listing, Neil Young x{bag.mult('Neil Young')}, {dt:.3f}s")


# -- 2 ---------------------------------------------------------------------


def test_c02_unit_fixtures():
    checks = {}
    checks["tuple"] = running_tuple() in enumerate_tuples(running_expr(), RUNNING_DOC, "ab")
    X, Y = Reg("X"), Reg("Y")
    s1 = Assignment(X=("a", X, "a"), Y=(X, Y))
    s2 = Assignment(X=("b", X, "b"), Y=("b",))
    s3 = Assignment(X=("ba", X, "ab"), Y=("b",))
    checks["compose"] = compose_assign(s1, s2) == s3 and not is_copyless(s1) and is_copyless(s2) and is_copyless(s3)
    w = parse_refword("##<x Holiday x>;<y Billie y>;USA#")
    checks["dsst"] = dsst_run(t1(), w) == "Billie Holiday"
    checks["garbage"] = not is_garbage_free(garbage_nsst())
    bad = [k for k, v in checks.items() if not v]
    report(2, not bad, "all four fixtures match" if not bad else f"mismatch: {bad}")


# -- 3 ---------------------------------------------------------------------


def c3_machines():
    for seed in range(200):
        rng = random.Random(seed)
        yield seed, random_gf_nsst(rng, max_states=4, max_regs=3, sigma="abc", out="ab", dup_rate=0.15)


def test_c03_evaluation_vs_oracle():
    t = time.perf_counter()
    bad = 0
    cases = 0
    dups = 0
    for seed, T in c3_machines():
        dups += len(T.transitions) != len(set(T.transitions))
        for w in words(T.input_alphabet, 6):
            cases += 1
            if evaluate(T, w).bag() != nsst_bag(T, w):
                bad += 1
    dt = time.perf_counter() - t
    report(3, bad == 0 and dt < 300, f"{cases} (machine, word) cases, {bad} mismatches, {dups} machines with duplicates, {dt:.1f}s")


# -- 4 ---------------------------------------------------------------------


def test_c04_et_to_nsst():
    bad = 0
    nonempty = 0
    for seed in range(100):
        rng = random.Random(seed)
        e = random_expr(rng, size=10)
        T = random_dsst(rng, max_states=4)
        p = EtProgram(e, T, alphabet="ab")
        N = p.nsst()
        for w in words("ab", 6):
            ref = et_bag(p, w)
            nonempty += bool(ref)
            if nsst_bag(N, w) != ref:
                bad += 1
    report(4, bad == 0, f"100 programs x 127 documents, {bad} mismatches, {nonempty} non-empty bags")


# -- 5 ---------------------------------------------------------------------


def test_c05_garbage_free_transform():
    machines = [T for _, T in c3_machines()]
    for seed in range(200):
        machines.append(random_nsst(random.Random(10_000 + seed), max_states=3, max_regs=3, sigma="ab", out="ab"))
    sem_bad = gf_bad = disagree = 0
    garbage = 0
    for T in machines:
        T2 = garbage_free_transform(T)
        for w in words(T.input_alphabet, 5):
            if nsst_bag(T, w) != nsst_bag(T2, w):
                sem_bad += 1
                break
        gf_bad += not is_garbage_free(T2)
        verdict = is_garbage_free(T)
        garbage += not verdict
        disagree += verdict != garbage_free_by_runs(T, 5)
        disagree += is_garbage_free(T2) != garbage_free_by_runs(T2, 5)
    ok = sem_bad == gf_bad == disagree == 0
    report(5, ok, f"{len(machines)} machines ({garbage} with garbage): {sem_bad} semantic changes, "
                  f"{gf_bad} not garbage-free after, {disagree} checker disagreements")


# -- 6 ---------------------------------------------------------------------


def test_c06_nsst_to_et_round_trip():
    bad = 0
    for seed in range(50):
        rng = random.Random(20_000 + seed)
        T = random_nsst(rng, max_states=3, max_regs=2, sigma="ab", out="ab", density=0.5)
        e, D = nsst_to_et(T)
        N = EtProgram(e, D, alphabet=T.input_alphabet).nsst()
        for w in words(T.input_alphabet, 4):
            if nsst_bag(N, w) != nsst_bag(T, w):
                bad += 1
    report(6, bad == 0, f"50 machines, {bad} mismatches")


# -- 7 ---------------------------------------------------------------------


def test_c07_ecsa():
    rng = random.Random(7)
    D = Ecsa()
    drv = EcsaDriver(D, rng)
    unsafe = deep = 0
    worst = 0
    for _ in range(10_000):
        n = drv.step()
        unsafe += not D.is_safe(n)
        worst = max(worst, D.odepth(n))
    deep = worst > 4
    enum_bad = 0
    for i in range(500):
        r = random.Random(70_000 + i)
        E = Ecsa(debug=True)
        d = EcsaDriver(E, r)
        for _ in range(r.randint(1, 30)):
            d.step()
        n = d.nodes[-1]
        enum_bad += Bag(E.enumerate(n)) != E.materialize(n)
    # persistence: snapshots taken early must survive later writes and reads
    rng = random.Random(77)
    P = Ecsa()
    drv = EcsaDriver(P, rng)
    snaps = {}
    persist_bad = 0
    for i in range(2000):
        n = drv.step()
        if i % 50 == 0:
            snaps[n] = P.materialize(n)
        if snaps and i % 13 == 0:
            m = rng.choice(list(snaps))
            persist_bad += Bag(P.enumerate(m)) != snaps[m]
    persist_bad += sum(P.materialize(m) != b for m, b in snaps.items())
    ok = not unsafe and not deep and not enum_bad and not persist_bad
    report(7, ok, f"10^4 ops: {unsafe} unsafe, max odepth {worst}; 500 DAGs: {enum_bad} enumeration mismatches; "
                  f"{persist_bad} persistence violations")


# -- 8 ---------------------------------------------------------------------


def _r2(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, icpt = np.polyfit(xs, ys, 1)
    pred = slope * xs + icpt
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def _fixed_machines():
    p = EtProgram(e1(), t1(), alphabet=set(SINGERS))
    singers = p.garbage_free()

    def singers_doc(n):
        return (SINGERS * (n // len(SINGERS) + 1))[:n]

    rng = random.Random(8)
    abw = "".join(rng.choice("ab") for _ in range(10 ** 5))
    gar = garbage_free_transform(garbage_nsst())
    return [("singers", singers, singers_doc), ("garbage", gar, lambda n: abw[:n])]


def test_c08_steps_and_delay():
    sizes = [10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5]
    parts = []
    ok = True
    for name, T, doc in _fixed_machines():
        steps, ratios, outs = [], [], []
        for n in sizes:
            ev = evaluate(T, doc(n), check=False)
            steps.append(ev.stats["preprocessing_steps"])
            outs.append(sum(1 for _ in ev))
            ratios.append(ev.stats["max_delay_ratio"])
        r2 = _r2(sizes, steps)
        per = max(s / (len(T.transitions) * n) for s, n in zip(steps, sizes))
        # delay bound: 4 hops per output node plus one step per register piece
        bound = 4 * (len(T.registers) + 2)
        ok &= r2 >= 0.99 and max(ratios) <= bound
        parts.append(f"{name}: R^2={r2:.5f}, steps/(|D||w|)<={per:.3f}, delay ratios "
                     f"{'/'.join(f'{r:.2f}' for r in ratios)} (bound {bound}), outputs {outs}")
    report(8, ok, "; ".join(parts))


# -- 9 ---------------------------------------------------------------------


def test_c09_composition():
    bad = 0
    biggest = 0
    for seed in range(30):
        rng = random.Random(90_000 + seed)
        T1 = random_gf_nsst(rng, 2, 2, "ab", "ab", density=0.5, shrink_sigma=False)
        T2 = random_gf_nsst(rng, 2, 2, "ab", "ab", density=0.5, shrink_sigma=False)
        C = compose_nsst(T1, T2, max_states=50_000)
        biggest = max(biggest, C._cache["composed_from"]["states"])
        for w in words("ab", 4):
            if nsst_bag(C, w) != compose_bag(T1, T2, w):
                bad += 1
    rng = random.Random(9)

    def rand_asg():
        regs = "XYZ"
        dom = [r for r in regs if rng.random() < 0.7] or ["X"]
        groups = split_regs(rng, [r for r in regs if rng.random() < 0.7], len(dom))
        return Assignment({x: random_image(rng, g, "ab") for x, g in zip(dom, groups)})

    assoc_bad = 0
    for _ in range(10_000):
        a, b, c = (Subrun(rng.choice("pq"), rand_asg(), rng.choice("pq")) for _ in range(3))
        assoc_bad += subrun_mul(subrun_mul(a, b), c) != subrun_mul(a, subrun_mul(b, c))
    recon_bad = 0
    for _ in range(10_000):
        s = rand_asg()
        skel, zeta = summarize_assign(s, lambda x, j: f"{x}.{j}")
        recon_bad += unsummarize(skel, zeta) != s
    ok = bad == assoc_bad == recon_bad == 0
    report(9, ok, f"30 pairs x 31 documents: {bad} mismatches (largest {biggest} states); "
                  f"10^4 associativity: {assoc_bad} failures; 10^4 reconstructions: {recon_bad} failures")


# -- 10 --------------------------------------------------------------------


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue()


def test_c10_pipeline():
    args = ["run", "-s", DATA / "e1.msre", "-t", DATA / "t1.sst",
            "-s", DATA / "reformat.msre", "-t", DATA / "reformat.sst", "-i", DATA / "toy.txt"]
    c1, fold = _cli(*args)
    c2, nested = _cli(*args, "--strategy", "nested")
    a, b = Bag(fold.splitlines()), Bag(nested.splitlines())
    ok = c1 == c2 == 0 and a == b and len(a) > 0
    report(10, ok, f"fold {len(a)} lines, nested {len(b)} lines, multisets {'equal' if a == b else 'differ'}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    raise SystemExit(1 if failed else 0)
