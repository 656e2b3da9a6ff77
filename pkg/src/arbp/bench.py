"""Monte Carlo BER harness, training driver, ablation runner, complexity
cost model, and report emission.

Reports are deterministic for a fixed (seed, config, worker count): frame
noise for worker w in round r comes from the stream SeedSequence(seed + w,
spawn_key=(r,)), and results are aggregated in worker order. Wall time is
recorded in the JSON mirror only, so CSVs are byte-identical across runs.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bp as bp_mod
from . import hyper
from .channel import transmit
from .codes import encode, load_code
from .graph import build
from .oracles import enumerate_codebook, exact_map

CSV_SCHEMA_VERSION = 1


@dataclass
class DecoderSpec:
    kind: str                 # "bp" | "ar-hyper" | "map-oracle"
    L: int = 5
    mode: str = "exact"       # check-node mode for bp / ar-hyper evaluation
    q: int = 1005
    early_exit: bool = False  # zero-syndrome early exit ("at convergence")
    variant: str = "Full"
    params: hyper.DecoderParams | None = None

    def label(self):
        if self.kind == "bp":
            tag = f"bp(L={self.L}{',early-exit' if self.early_exit else ''})"
        elif self.kind == "ar-hyper":
            tag = f"ar-hyper(L={self.L},{self.variant})"
        else:
            tag = "map-oracle"
        return tag


@dataclass
class BerRow:
    decoder: str
    code: str
    snr_db: float
    frames_run: int
    bit_errors: int
    frame_errors: int
    ber: float
    neg_ln_ber: float
    wall_time: float
    L: int
    q: int
    seed: int
    variant: str
    workers: int


@dataclass
class BerReport:
    rows: list

    CSV_FIELDS = (
        "schema_version decoder code snr_db frames_run bit_errors frame_errors "
        "ber neg_ln_ber L q seed variant workers"
    ).split()

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for r in self.rows:
            w.writerow(
                [
                    CSV_SCHEMA_VERSION,
                    r.decoder,
                    r.code,
                    f"{r.snr_db:g}",
                    r.frames_run,
                    r.bit_errors,
                    r.frame_errors,
                    f"{r.ber:.12g}",
                    f"{r.neg_ln_ber:.12g}",
                    r.L,
                    r.q,
                    r.seed,
                    r.variant,
                    r.workers,
                ]
            )
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "schema_version": CSV_SCHEMA_VERSION,
                "rows": [vars(r) for r in self.rows],
            },
            indent=2,
        )


def _decode_batch(spec, code, graph, codebook, snr_db, rng, batch_size):
    """Generate, transmit, and decode one batch; returns error counts."""
    info = rng.integers(0, 2, (batch_size, code.k))
    truth = encode(info, code)
    frame = transmit(truth, snr_db, code.rate, rng)
    if spec.kind == "bp":
        res = bp_mod.decode_bp(
            frame.llr,
            graph,
            spec.L,
            mode=spec.mode,
            q=spec.q,
            early_exit_H=code.H if spec.early_exit else None,
        )
        bits = res.bits
    elif spec.kind == "ar-hyper":
        bits = hyper.decode_ar(
            frame.llr, code, graph, spec.params, mode=spec.mode,
            variant="Full" if spec.variant == "ZeroCodeword" else spec.variant,
        ).bits
    elif spec.kind == "map-oracle":
        bits = np.stack([exact_map(l, codebook) for l in frame.llr])
    else:
        raise ValueError(f"unknown decoder kind {spec.kind!r}")
    wrong = bits != truth
    return int(wrong.sum()), int(wrong.any(axis=1).sum())


_POOL_CTX = {}


def _pool_init(spec, code, graph, need_codebook, snr_db, seed, batch_size):
    _POOL_CTX.update(
        spec=spec,
        code=code,
        graph=graph,
        codebook=enumerate_codebook(code) if need_codebook else None,
        snr_db=snr_db,
        seed=seed,
        batch_size=batch_size,
    )


def _pool_task(args):
    w, r = args
    c = _POOL_CTX
    rng = np.random.default_rng(np.random.SeedSequence(c["seed"] + w, spawn_key=(r,)))
    return _decode_batch(
        c["spec"], c["code"], c["graph"], c["codebook"], c["snr_db"], rng,
        c["batch_size"],
    )


def _default_batch(spec):
    return {"bp": 2000, "ar-hyper": 256, "map-oracle": 512}[spec.kind]


def run_ber(spec, code, snr_list, min_bit_errors=500, max_frames=2_000_000,
            seed=0, workers=1, batch_size=None, graph=None):
    """Monte Carlo BER: random information words per frame, run until
    min_bit_errors or max_frames per SNR point, whichever comes first."""
    graph = graph or build(code.H)
    if spec.kind == "ar-hyper" and spec.params is None:
        raise ValueError("ar-hyper requires decoder params")
    batch_size = batch_size or _default_batch(spec)
    codebook = enumerate_codebook(code) if spec.kind == "map-oracle" else None
    rows = []
    for snr_db in snr_list:
        t0 = time.perf_counter()
        bit_errors = frame_errors = frames = 0
        r = 0
        if workers > 1:
            pool = ProcessPoolExecutor(
                max_workers=workers,
                initializer=_pool_init,
                initargs=(spec, code, graph, codebook is not None, snr_db, seed,
                          batch_size),
            )
        else:
            pool = None
        try:
            while bit_errors < min_bit_errors and frames < max_frames:
                tasks = [(w, r) for w in range(workers)]
                if pool is None:
                    results = [
                        _decode_batch(
                            spec, code, graph, codebook, snr_db,
                            np.random.default_rng(
                                np.random.SeedSequence(seed + w, spawn_key=(r,))
                            ),
                            batch_size,
                        )
                        for w, _ in tasks
                    ]
                else:
                    results = list(pool.map(_pool_task, tasks))
                for be, fe in results:
                    bit_errors += be
                    frame_errors += fe
                    frames += batch_size
                r += 1
        finally:
            if pool is not None:
                pool.shutdown()
        ber = bit_errors / (frames * code.n)
        rows.append(
            BerRow(
                decoder=spec.label(),
                code=code.name or "custom",
                snr_db=float(snr_db),
                frames_run=frames,
                bit_errors=bit_errors,
                frame_errors=frame_errors,
                ber=ber,
                neg_ln_ber=-math.log(ber) if bit_errors > 0 else float("inf"),
                wall_time=time.perf_counter() - t0,
                L=spec.L,
                q=spec.q,
                seed=seed,
                variant=spec.variant,
                workers=workers,
            )
        )
    return BerReport(rows=rows)


# ---------------------------------------------------------------------------
# Complexity cost model

@dataclass(frozen=True)
class CostEstimate:
    base_ops: float          # weighted-BP multiply count
    hyper_ops_delta: float   # added by the hypernetwork layer
    ar_ops_delta: float      # added by the autoregressive features
    overhead_ratio: float    # ar / (base + hyper)


def cost_model(code, graph, L, n_uf=128, n_ug=16):
    """Closed-form operation counts: the hypernetwork adds L*E*n_ug*n_uf
    multiplies, the autoregressive features add L*n*(E + d + n_uf)."""
    var_deg = np.bincount(graph.vv, minlength=graph.n)
    check_deg = np.bincount(graph.cc, minlength=graph.m)
    base = float(L * (np.sum(var_deg**2) + np.sum(check_deg**2)))
    d = code.H_ext.shape[0]
    hyper_delta = float(L * graph.E * n_ug * n_uf)
    ar_delta = float(L * code.n * (graph.E + d + n_uf))
    denom = base + hyper_delta
    return CostEstimate(
        base_ops=base,
        hyper_ops_delta=hyper_delta,
        ar_ops_delta=ar_delta,
        overhead_ratio=ar_delta / denom if denom > 0 else 0.0,
    )


# ---------------------------------------------------------------------------
# Symmetry check

SYMMETRY_TOL = 1e-8


def check_symmetry(spec, code, graph=None, trials=100, seed=0):
    """Decode random frames under llr and -llr and measure how far messages
    and marginals are from exact antisymmetry."""
    graph = graph or build(code.H)
    rng = np.random.default_rng(seed)
    llr = rng.normal(0.0, 2.0, (trials, code.n))
    if spec.kind == "bp":
        rp = bp_mod.decode_bp(llr, graph, spec.L, mode=spec.mode, q=spec.q,
                              record_messages=True)
        rm = bp_mod.decode_bp(-llr, graph, spec.L, mode=spec.mode, q=spec.q,
                              record_messages=True)
        x_p, x_m = rp.x_history, rm.x_history
        o_p, o_m = rp.o_history, rm.o_history
    elif spec.kind == "ar-hyper":
        o_p, _, _, tp = hyper._forward(llr, code, graph, spec.params, spec.mode,
                                       spec.variant, keep_tape=True)
        o_m, _, _, tm = hyper._forward(-llr, code, graph, spec.params, spec.mode,
                                       spec.variant, keep_tape=True)
        x_p = [t.xc for t in tp]
        x_m = [t.xc for t in tm]
    else:
        raise ValueError("symmetry check supports bp and ar-hyper")
    asym = 0.0
    for xp, xm in zip(x_p, x_m):
        asym = max(asym, float(np.abs(xp + xm).max()))
    for op, om in zip(o_p, o_m):
        asym = max(asym, float(np.abs(op + om - 1.0).max()))
    return {"max_message_asymmetry": asym, "violated": asym > SYMMETRY_TOL}


# ---------------------------------------------------------------------------
# Training driver

def run_training(code, steps, seed, variant="Full", graph=None, lr=1e-4, L=5,
                 q=1005, per_snr=15, snr_values=tuple(range(1, 9)),
                 checkpoint_path=None, checkpoint_every=1000, resume=None,
                 callback=None):
    """Train the autoregressive decoder; returns (params, loss curve).

    Checkpoints carry optimizer and RNG state, so resuming reproduces the
    uninterrupted run bit-exactly.
    """
    graph = graph or build(code.H)
    if variant not in hyper.VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    losses = []
    if resume is not None:
        params, adam_states, meta = hyper.load_decoder(resume)
        rng = np.random.default_rng()
        rng.bit_generator.state = meta["rng_state"]
        start = int(meta["step"])
        losses = [tuple(x) for x in meta.get("loss_curve", [])]
    else:
        rng = np.random.default_rng(seed)
        params = hyper.init_decoder_params(code, graph, rng, L=L, q=q)
        adam_states = hyper.init_adam(params, lr=lr)
        start = 0

    def save(path, step):
        hyper.save_decoder(
            path,
            params,
            adam_states,
            meta={
                "code": code.name,
                "variant": variant,
                "seed": seed,
                "step": step,
                "per_snr": per_snr,
                "snr_values": list(snr_values),
                "rng_state": rng.bit_generator.state,
                "loss_curve": [[int(s), float(l)] for s, l in losses[-200:]],
            },
        )

    zero_cw = variant == "ZeroCodeword"
    for step in range(start, steps):
        llr2, truth2 = hyper.make_batch(
            code, rng, per_snr=per_snr, snr_values=snr_values,
            zero_codeword=zero_cw,
        )
        value = hyper.train_step(llr2, truth2, code, graph, params, adam_states,
                                 variant=variant)
        losses.append((step, value))
        if callback is not None:
            callback(step, value)
        if checkpoint_path and (step + 1) % checkpoint_every == 0:
            save(checkpoint_path, step + 1)
    if checkpoint_path:
        save(checkpoint_path, steps)
    return params, losses


def run_ablation(code, variants, steps, eval_snrs, seed=0, graph=None,
                 min_bit_errors=500, max_frames=500_000, **train_kw):
    """Train each variant with an identical seed/schedule, evaluate BER, and
    return comparison rows (variant, snr, neg_ln_ber, ber, counts)."""
    graph = graph or build(code.H)
    out = []
    for variant in variants:
        params, _ = run_training(code, steps, seed, variant=variant, graph=graph,
                                 **train_kw)
        spec = DecoderSpec(kind="ar-hyper", L=params.L, q=params.q,
                           variant=variant, params=params)
        report = run_ber(spec, code, eval_snrs, min_bit_errors=min_bit_errors,
                         max_frames=max_frames, seed=seed, graph=graph)
        out.extend(report.rows)
    return BerReport(rows=out)
