"""Text formats and the ``altattack`` command line.

Every file starts with a versioned header line.  Field elements are the
integer codes of :mod:`altattack.field_tower`; the point at infinity is
written ``inf``.

Exit codes: 0 success, 1 parameter or input error, 2 heuristic failure
or rejected key (a transcript is written when one exists), 3 the code is
outside the distinguishable regime.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import gf_linalg as la
from .algebraic_codes import INF, PRNG_ID, AlternantKey, check_params, goppa_keygen, keygen
from .attack_pipeline import AttackConfig, AttackError, renormalize, run_attack, verify_key
from .code_ops import LinearCode, dual
from .distinguisher import measure
from .field_tower import FieldParams, Tower, build_tower
from .filtration import FiltrationError, expected_conductor, run_filtration
from .recovery_r3 import RecoveryError, recover

CODE_HEADER = "altattack-code v1"
KEY_HEADER = "altattack-key v1"
SOLUTIONS_HEADER = "altattack-solutions v1"

EXIT_OK, EXIT_PARAM, EXIT_HEURISTIC, EXIT_UNDISTINGUISHABLE = 0, 1, 2, 3


class FormatError(ValueError):
    pass


# serialization

def _vec_text(v) -> str:
    return " ".join("inf" if int(a) == INF else str(int(a)) for a in v)


def _vec_parse(text: str) -> np.ndarray:
    return np.array([INF if t == "inf" else int(t) for t in text.split()], dtype=np.int64)


def _tower_from(params_text: str) -> Tower:
    fp = FieldParams.from_text(params_text)
    tower = build_tower(fp.p, fp.s, fp.m)
    if tower.params != fp:
        raise FormatError("field moduli differ from the canonical tower")
    return tower


def code_to_text(C: LinearCode) -> str:
    tag = "ext" if C.ext else "base"
    k = 1 if not C.ext else C.tower.m
    return (f"{CODE_HEADER}\nfield {C.tower.params.to_text()}\nover {tag} n {C.n} dim {C.dim}\n"
            + la.matrix_to_text(C.basis, C.tower.q, k))


def code_from_text(text: str) -> LinearCode:
    lines = text.splitlines(keepends=True)
    if not lines or lines[0].strip() != CODE_HEADER:
        raise FormatError("not a code file")
    tower = _tower_from(lines[1].split(None, 1)[1])
    info = lines[2].split()
    ext = info[1] == "ext"
    n, dim = int(info[3]), int(info[5])
    M, _, _ = la.matrix_from_text("".join(lines[3:]))
    if M.shape != (dim, n):
        raise FormatError("matrix shape does not match the code header")
    return LinearCode(tower, M, ext=ext, n=n)


def key_to_text(tower: Tower, r: int, x, y, seed=None, prng: str = PRNG_ID, gamma=None) -> str:
    lines = [KEY_HEADER, f"field {tower.params.to_text()}", f"r {r}", f"n {len(x)}",
             f"seed {'none' if seed is None else seed}", f"prng {prng}",
             f"x {_vec_text(x)}", f"y {_vec_text(y)}",
             f"gamma {'none' if gamma is None else ' '.join(map(str, gamma))}"]
    return "\n".join(lines) + "\n"


@dataclass
class KeyFile:
    tower: Tower
    r: int
    x: np.ndarray
    y: np.ndarray
    seed: Optional[int]
    prng: str
    gamma: Optional[tuple]

    def to_text(self) -> str:
        return key_to_text(self.tower, self.r, self.x, self.y, self.seed, self.prng, self.gamma)


def key_from_text(text: str) -> KeyFile:
    lines = text.splitlines()
    if not lines or lines[0].strip() != KEY_HEADER:
        raise FormatError("not a key file")
    fields = {}
    for line in lines[1:]:
        if line.strip():
            name, _, rest = line.partition(" ")
            fields[name] = rest
    tower = _tower_from(fields["field"])
    x = _vec_parse(fields["x"])
    y = _vec_parse(fields["y"])
    if x.size != int(fields["n"]) or y.size != x.size:
        raise FormatError("support or multiplier length does not match n")
    Q = tower.Q
    if ((x != INF) & ((x < 0) | (x >= Q))).any() or ((y < 0) | (y >= Q)).any():
        raise FormatError(f"key entries must be field elements below {Q} (or inf in the support)")
    seed = None if fields["seed"] == "none" else int(fields["seed"])
    gamma = None if fields.get("gamma", "none") == "none" else tuple(int(t) for t in fields["gamma"].split())
    return KeyFile(tower, int(fields["r"]), x, y, seed, fields["prng"], gamma)


def solutions_to_text(tower: Tower, r: int, sols) -> str:
    out = [SOLUTIONS_HEADER, f"field {tower.params.to_text()}", f"r {r}", f"count {len(sols)}"]
    for x, y in sols:
        out.append(f"x {_vec_text(x)}")
        out.append(f"y {_vec_text(y)}")
    return "\n".join(out) + "\n"


def solutions_from_text(text: str):
    lines = text.splitlines()
    if not lines or lines[0].strip() != SOLUTIONS_HEADER:
        raise FormatError("not a solutions file")
    tower = _tower_from(lines[1].split(None, 1)[1])
    r = int(lines[2].split()[1])
    count = int(lines[3].split()[1])
    sols = []
    for c in range(count):
        x = _vec_parse(lines[4 + 2 * c].split(None, 1)[1])
        y = _vec_parse(lines[5 + 2 * c].split(None, 1)[1])
        sols.append((x, y))
    return tower, r, sols


def read_code(path) -> LinearCode:
    return code_from_text(Path(path).read_text())


def read_key(path) -> KeyFile:
    return key_from_text(Path(path).read_text())


# commands

@dataclass
class RunConfig:
    command: str
    q: Optional[int] = None
    m: Optional[int] = None
    n: Optional[int] = None
    r: Optional[int] = None
    seed: int = 0
    prng: str = PRNG_ID
    target_degree: int = 3
    retries: int = 10
    threads: int = 1
    dump_dir: Optional[str] = None
    pub: Optional[str] = None
    key: Optional[str] = None
    out: Optional[str] = None
    goppa: bool = False
    check: bool = False
    ms: Optional[str] = None


def _write(path: Optional[str], text: str):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _check_field(cfg: RunConfig, C: LinearCode):
    if cfg.q is not None and cfg.q != C.tower.q:
        raise ValueError(f"--q {cfg.q} does not match the code field F_{C.tower.q}")
    if cfg.m is not None and cfg.m != C.tower.m:
        raise ValueError(f"--m {cfg.m} does not match the code field")
    if cfg.n is not None and cfg.n != C.n:
        raise ValueError(f"--n {cfg.n} does not match the code length {C.n}")


def _degree(cfg: RunConfig, C: LinearCode) -> int:
    if cfg.r is not None:
        return cfg.r
    m = C.tower.m
    if (C.n - C.dim) % m:
        raise ValueError("cannot infer r from the code; pass --r")
    return (C.n - C.dim) // m


def cmd_keygen(cfg: RunConfig) -> int:
    for name in ("q", "m", "n", "r"):
        if getattr(cfg, name) is None:
            raise ValueError(f"--{name} is required")
    gen = goppa_keygen if cfg.goppa else keygen
    key = gen(cfg.q, cfg.m, cfg.n, cfg.r, cfg.seed)
    prefix = cfg.out or "key"
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    Path(prefix + ".key").write_text(key_to_text(key.tower, key.r, key.x, key.y, key.seed, key.prng, key.gamma))
    Path(prefix + ".pub").write_text(code_to_text(key.public_code()))
    print(f"wrote {prefix}.key {prefix}.pub")
    return EXIT_OK


def cmd_distinguish(cfg: RunConfig) -> int:
    C = read_code(cfg.pub)
    _check_field(cfg, C)
    rep = measure(C, 0, _degree(cfg, C))
    _write(cfg.out, rep.to_text() + "\n")
    return EXIT_OK if rep.distinguishable else EXIT_UNDISTINGUISHABLE


def cmd_filtrate(cfg: RunConfig) -> int:
    C = read_code(cfg.pub)
    _check_field(cfg, C)
    r = _degree(cfg, C)
    try:
        code, steps, removed = run_filtration(C, r, cfg.target_degree, None, cfg.retries)
    except FiltrationError as exc:
        for st in exc.steps:
            print(st.to_text())
        print(f"filtration failed: {exc}", file=sys.stderr)
        return EXIT_UNDISTINGUISHABLE if exc.kind == "undistinguishable" else EXIT_HEURISTIC
    lines = [st.to_text() for st in steps]
    if cfg.check:
        if not cfg.key:
            raise ValueError("--check needs the secret key file (--key)")
        kf = read_key(cfg.key)
        key = AlternantKey(kf.tower, kf.r, kf.x, kf.y, C.basis, np.arange(C.n))
        ok = dual(code) == expected_conductor(key, removed)
        lines.append(f"check expected_conductor={int(ok)}")
    print("\n".join(lines))
    if cfg.out:
        _write(cfg.out, code_to_text(code))
    return EXIT_OK


def cmd_recover(cfg: RunConfig) -> int:
    C = read_code(cfg.pub)
    _check_field(cfg, C)
    if _degree(cfg, C) != 3:
        raise ValueError("recover expects a degree-3 code; use attack or filtrate first")
    try:
        res = recover(C.tower, C, seed=cfg.seed, dump_dir=cfg.dump_dir)
    except RecoveryError as exc:
        print(f"recovery failed: {exc}", file=sys.stderr)
        print(exc.transcript, file=sys.stderr)
        return EXIT_HEURISTIC
    _write(cfg.out, solutions_to_text(C.tower, 3, res.solutions))
    return EXIT_OK


def cmd_attack(cfg: RunConfig) -> int:
    C = read_code(cfg.pub)
    _check_field(cfg, C)
    r = _degree(cfg, C)
    prefix = cfg.out or "recovered"
    try:
        tr = run_attack(C, r, AttackConfig(retries=cfg.retries, seed=cfg.seed))
    except AttackError as exc:
        if exc.transcript is not None:
            _write(prefix + ".transcript", exc.transcript.to_text())
        print(f"attack failed ({exc.kind}): {exc}", file=sys.stderr)
        return {"param": EXIT_PARAM, "undistinguishable": EXIT_UNDISTINGUISHABLE}.get(exc.kind, EXIT_HEURISTIC)
    _write(prefix + ".transcript", tr.to_text())
    x, y = tr.key
    _write(prefix + ".key", key_to_text(C.tower, r, x, y, None))
    print(f"verdict {int(tr.verdict)}; wrote {prefix}.key {prefix}.transcript")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    C = read_code(cfg.pub)
    kf = read_key(cfg.key)
    if kf.tower.params != C.tower.params:
        raise ValueError("key and code are over different fields")
    r = cfg.r if cfg.r is not None else kf.r
    ok = verify_key(C, kf.x, kf.y, r)
    print(f"verified {int(ok)}")
    return EXIT_OK if ok else EXIT_HEURISTIC


def cmd_bench(cfg: RunConfig) -> int:
    q = cfg.q or 3
    ms = [int(t) for t in (cfg.ms or "3,4,5,6").split(",")]
    rows = bench_recovery(q, ms, cfg.seed)
    for m, n, sec in rows:
        print(f"m={m} n={n} seconds={'failed' if sec is None else f'{sec:.4f}'}")
    ok = [r for r in rows if r[2] is not None]
    if len(ok) < 2:
        print("slope undefined")
        return EXIT_HEURISTIC
    print(f"slope {loglog_slope([r[0] for r in ok], [r[2] for r in ok]):.3f}")
    return EXIT_OK if len(ok) == len(rows) else EXIT_HEURISTIC


def bench_recovery(q: int, ms: Sequence[int], seed: int = 0, reps: int = 1):
    """Recovery wall time on degree-3 keys of length C(3m,2) + 2m + 10, capped at q^m.

    A size where recovery fails is reported with time None.
    """
    out = []
    for m in ms:
        n = min(q ** m, math.comb(3 * m, 2) + 2 * m + 10)
        best = math.inf
        for rep in range(reps):
            key = keygen(q, m, n, 3, seed + rep)
            t0 = time.perf_counter()
            try:
                recover(key.tower, key.public_code(), seed=seed)
            except RecoveryError:
                best = None
                break
            best = min(best, time.perf_counter() - t0)
        out.append((m, n, best))
    return out


def loglog_slope(xs, ys) -> float:
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


COMMANDS = {"keygen": cmd_keygen, "distinguish": cmd_distinguish, "filtrate": cmd_filtrate,
            "recover": cmd_recover, "attack": cmd_attack, "verify": cmd_verify, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="altattack", description="Key recovery for high-rate alternant codes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--q", type=int)
        s.add_argument("--m", type=int)
        s.add_argument("--n", type=int)
        s.add_argument("--r", type=int)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--prng", default=PRNG_ID)
        s.add_argument("--target-degree", type=int, default=3)
        s.add_argument("--retries", type=int, default=10)
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--dump-dir")
        s.add_argument("--pub")
        s.add_argument("--key")
        s.add_argument("--out")
        if name == "keygen":
            s.add_argument("--goppa", action="store_true", help="draw a Goppa key")
        if name == "filtrate":
            s.add_argument("--check", action="store_true",
                           help="compare with the expected conductor (reads the secret key)")
        if name == "bench":
            s.add_argument("--ms", help="comma-separated extension degrees")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(command=ns.command, q=ns.q, m=ns.m, n=ns.n, r=ns.r, seed=ns.seed, prng=ns.prng,
                     target_degree=ns.target_degree, retries=ns.retries, threads=ns.threads,
                     dump_dir=ns.dump_dir, pub=ns.pub, key=ns.key, out=ns.out,
                     goppa=getattr(ns, "goppa", False), check=getattr(ns, "check", False),
                     ms=getattr(ns, "ms", None))


def validate(cfg: RunConfig):
    if cfg.prng != PRNG_ID:
        raise ValueError(f"unsupported PRNG {cfg.prng!r}; only {PRNG_ID} is available")
    if cfg.threads < 1:
        raise ValueError("--threads must be positive")
    if None not in (cfg.q, cfg.m, cfg.n, cfg.r):
        check_params(cfg.q, cfg.m, cfg.n, cfg.r)
    if cfg.command in ("distinguish", "filtrate", "recover", "attack", "verify") and not cfg.pub:
        raise ValueError("--pub is required")
    if cfg.command == "verify" and not cfg.key:
        raise ValueError("--key is required")


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING)
    cfg = config_from_args(ns)
    try:
        validate(cfg)
        return COMMANDS[cfg.command](cfg)
    except (ValueError, FormatError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
