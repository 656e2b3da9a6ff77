"""Command-line entry points: `arbp ber|train|ablate|cost|symcheck|oracle-compare`."""
from __future__ import annotations

import csv
import json
import sys

import click
import numpy as np

from . import bench, hyper
from .codes import load_code, registry_ids
from .graph import build


def _load(code_id, gen_path):
    return load_code(code_id, gen_path)


def _parse_snrs(text):
    return [float(s) for s in text.split(",") if s.strip()]


def _emit(report, out):
    if out is None:
        click.echo(report.to_csv(), nl=False)
    elif str(out).endswith(".json"):
        with open(out, "w") as fh:
            fh.write(report.to_json())
        click.echo(f"wrote {out}")
    else:
        with open(out, "w") as fh:
            fh.write(report.to_csv())
        click.echo(f"wrote {out}")


@click.group()
def main():
    """Block-code BER benchmarking and decoder training."""


code_opt = click.option("--code", "code_id", required=True,
                        help=f"registry id ({', '.join(registry_ids())}) or alist path")
gen_opt = click.option("--gen", "gen_path", default=None,
                       help="generator matrix file (dense text), for alist paths")
seed_opt = click.option("--seed", default=0, show_default=True, type=int)


@main.command()
@code_opt
@gen_opt
@click.option("--snr", default="4,5,6", show_default=True, help="comma-separated dB list")
@click.option("--decoder", default="bp", show_default=True,
              type=click.Choice(["bp", "ar-hyper", "map-oracle"]))
@click.option("--iters", "-L", "iters", default=5, show_default=True, type=int)
@click.option("--taylor-q", default=None, type=int,
              help="use the Taylor check step of this odd order")
@click.option("--early-exit", is_flag=True, help="stop frames on zero syndrome")
@click.option("--checkpoint", default=None, help="decoder checkpoint (ar-hyper)")
@click.option("--min-errors", default=500, show_default=True, type=int)
@click.option("--max-frames", default=2_000_000, show_default=True, type=int)
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--out", default=None, help="output path (.csv or .json)")
@seed_opt
def ber(code_id, gen_path, snr, decoder, iters, taylor_q, early_exit, checkpoint,
        min_errors, max_frames, workers, out, seed):
    """Monte Carlo bit-error-rate evaluation."""
    code = _load(code_id, gen_path)
    params = None
    if decoder == "ar-hyper":
        if checkpoint is None:
            raise click.UsageError("--checkpoint is required for ar-hyper")
        params, _, meta = hyper.load_decoder(checkpoint)
        iters = params.L
    spec = bench.DecoderSpec(
        kind=decoder,
        L=iters,
        mode="taylor" if taylor_q else "exact",
        q=taylor_q or 1005,
        early_exit=early_exit,
        variant=meta.get("variant", "Full") if decoder == "ar-hyper" else "Full",
        params=params,
    )
    report = bench.run_ber(spec, code, _parse_snrs(snr), min_bit_errors=min_errors,
                           max_frames=max_frames, seed=seed, workers=workers)
    _emit(report, out)


@main.command()
@code_opt
@gen_opt
@click.option("--steps", default=2000, show_default=True, type=int)
@click.option("--variant", default="Full", show_default=True,
              type=click.Choice(hyper.VARIANTS))
@click.option("--iters", "-L", "iters", default=5, show_default=True, type=int)
@click.option("--taylor-q", default=1005, show_default=True, type=int)
@click.option("--lr", default=1e-4, show_default=True, type=float)
@click.option("--checkpoint", required=True, help="checkpoint output path (.npz)")
@click.option("--checkpoint-every", default=1000, show_default=True, type=int)
@click.option("--resume", default=None, help="resume from this checkpoint")
@click.option("--loss-out", default=None, help="loss curve CSV path")
@seed_opt
def train(code_id, gen_path, steps, variant, iters, taylor_q, lr, checkpoint,
          checkpoint_every, resume, loss_out, seed):
    """Train the autoregressive hypernetwork decoder."""
    code = _load(code_id, gen_path)

    def progress(step, value):
        if (step + 1) % 50 == 0:
            click.echo(f"step {step + 1}: loss {value:.5f}")

    _, losses = bench.run_training(
        code, steps, seed, variant=variant, lr=lr, L=iters, q=taylor_q,
        checkpoint_path=checkpoint, checkpoint_every=checkpoint_every,
        resume=resume, callback=progress,
    )
    if loss_out:
        with open(loss_out, "w") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "loss"])
            w.writerows(losses)
        click.echo(f"wrote {loss_out}")
    click.echo(f"wrote {checkpoint}")


@main.command()
@code_opt
@gen_opt
@click.option("--variants", default="Full,ZeroCodeword", show_default=True)
@click.option("--steps", default=2000, show_default=True, type=int)
@click.option("--snr", default="6,7", show_default=True)
@click.option("--min-errors", default=500, show_default=True, type=int)
@click.option("--max-frames", default=500_000, show_default=True, type=int)
@click.option("--out", default=None)
@seed_opt
def ablate(code_id, gen_path, variants, steps, snr, min_errors, max_frames, out,
           seed):
    """Train and evaluate feature-ablation variants with a shared seed."""
    code = _load(code_id, gen_path)
    names = [v.strip() for v in variants.split(",")]
    for v in names:
        if v not in hyper.VARIANTS:
            raise click.UsageError(f"unknown variant {v}")
    report = bench.run_ablation(code, names, steps, _parse_snrs(snr), seed=seed,
                                min_bit_errors=min_errors, max_frames=max_frames)
    _emit(report, out)


@main.command()
@code_opt
@gen_opt
@click.option("--iters", "-L", "iters", default=5, show_default=True, type=int)
def cost(code_id, gen_path, iters):
    """Closed-form operation counts for the decoder variants."""
    code = _load(code_id, gen_path)
    graph = build(code.H)
    est = bench.cost_model(code, graph, iters)
    click.echo(json.dumps({
        "code": code.name,
        "L": iters,
        "base_ops": est.base_ops,
        "hyper_ops_delta": est.hyper_ops_delta,
        "ar_ops_delta": est.ar_ops_delta,
        "overhead_ratio": round(est.overhead_ratio, 6),
    }, indent=2))


@main.command()
@code_opt
@gen_opt
@click.option("--decoder", default="bp", show_default=True,
              type=click.Choice(["bp", "ar-hyper"]))
@click.option("--checkpoint", default=None)
@click.option("--random-params", is_flag=True,
              help="ar-hyper with fresh randomly initialized parameters")
@click.option("--trials", default=100, show_default=True, type=int)
@click.option("--iters", "-L", "iters", default=5, show_default=True, type=int)
@seed_opt
def symcheck(code_id, gen_path, decoder, checkpoint, random_params, trials, iters,
             seed):
    """Measure message antisymmetry under a global LLR sign flip."""
    code = _load(code_id, gen_path)
    graph = build(code.H)
    params = None
    if decoder == "ar-hyper":
        if checkpoint:
            params, _, _ = hyper.load_decoder(checkpoint)
        elif random_params:
            params = hyper.init_decoder_params(
                code, graph, np.random.default_rng(seed), L=iters)
        else:
            raise click.UsageError("ar-hyper needs --checkpoint or --random-params")
    spec = bench.DecoderSpec(kind=decoder, L=iters, params=params)
    result = bench.check_symmetry(spec, code, graph, trials=trials, seed=seed)
    click.echo(json.dumps(result, indent=2))
    sys.exit(0)


@main.command("oracle-compare")
@code_opt
@gen_opt
@click.option("--snr", default="2,4,6", show_default=True)
@click.option("--iters", "-L", "iters", default=5, show_default=True, type=int)
@click.option("--min-errors", default=200, show_default=True, type=int)
@click.option("--max-frames", default=200_000, show_default=True, type=int)
@click.option("--out", default=None)
@seed_opt
def oracle_compare(code_id, gen_path, snr, iters, min_errors, max_frames, out, seed):
    """BP vs exact-MAP bit error rates on matched noise (small codes only)."""
    code = _load(code_id, gen_path)
    snrs = _parse_snrs(snr)
    rows = []
    for kind in ("bp", "map-oracle"):
        spec = bench.DecoderSpec(kind=kind, L=iters)
        rows.extend(
            bench.run_ber(spec, code, snrs, min_bit_errors=min_errors,
                          max_frames=max_frames, seed=seed).rows
        )
    _emit(bench.BerReport(rows=rows), out)


if __name__ == "__main__":
    main()
