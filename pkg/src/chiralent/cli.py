"""Command-line front end: generate, train, eval, certify, calibrate, reproduce.

Every command writes its outputs plus ``manifest.json`` (config echo, seed,
library versions, output checksums) into the output directory. All
randomness derives from the single ``seed`` setting: the dataset generator
spawns one child stream per family, models and CV folds take the seed itself,
and restarts spawn from it.

Exit codes: 0 success, 1 tolerance failure in ``reproduce``, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, certify, config, dataset, features, io, noisecal, qstate, reproduce, spectral
from .errors import ChiralentError, ConfigError, SchemaMismatchError
from .ml import protocol

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE = 0, 1, 2

FAMILY_BUILDERS = {
    "tiles": qstate.make_tiles,
    "horodecki": qstate.make_horodecki,
    "chessboard": qstate.make_chessboard,
    "werner": qstate.make_werner,
    "param_pure": qstate.make_param_pure,
}


def _write_manifest(out: Path, command: str, settings: dict, outputs: list[Path]) -> None:
    io.write_json(out / "manifest.json", {
        "command": command,
        "config": settings,
        "seed": settings.get("seed"),
        "versions": {"chiralent": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": {p.name: io.sha256_file(p) for p in outputs},
    })


def _outdir(settings: dict, command: str) -> Path:
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_params(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse family parameters {text!r}") from exc


def grid_states(spec: str) -> tuple[list, list, list]:
    """States for ``family:lo:hi:n`` (horodecki, tiles, or marginal_noise on Horodecki(0.5))."""
    try:
        fam, lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ConfigError(f"grid must look like family:lo:hi:n, got {spec!r}") from exc
    if n < 1 or lo > hi:
        raise ConfigError(f"empty grid {spec!r}")
    states, labels, fams = [], [], []
    for v in np.linspace(lo, hi, n):
        v = float(v)
        try:
            if fam == "horodecki":
                rho, label = qstate.make_horodecki(v), qstate.StateLabel(qstate.Family.HORODECKI, {"a": v}, qstate.Truth.BE)
            elif fam == "tiles":
                rho, label = qstate.make_tiles(v), qstate.StateLabel(qstate.Family.TILES, {"eps": v}, qstate.Truth.BE)
            elif fam == "marginal_noise":
                rho = qstate.make_marginal_noise(qstate.make_horodecki(0.5), v)
                label = qstate.StateLabel(qstate.Family.MARGINAL_NOISE, {"seed_a": 0.5, "t": v}, qstate.Truth.UNKNOWN)
            else:
                raise ConfigError(f"unknown grid family {fam!r}")
        except ChiralentError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid grid point {v} for {fam}: {exc}") from exc
        if spectral.herm_eigvals(spectral.partial_transpose(rho, "A"))[-1] < dataset.PPT_TOL:
            raise ConfigError(f"grid point {fam}={v} is not PPT")
        states.append(rho)
        labels.append(label)
        fams.append(fam)
    return states, labels, fams


def cmd_generate(s: dict) -> int:
    out = _outdir(s, "generate")
    if s["grid"]:
        states, labels, fams = grid_states(s["grid"])
        X, names = features.feature_matrix(states, s["feature_set"])
        y = np.array([1 if lab.truth is qstate.Truth.BE else 0 for lab in labels])
        counts = {fams[0]: len(states)}
    else:
        cfg = dataset.GeneratorConfig(scale=1.0 if s["full_scale"] else s["scale"], seed=s["seed"])
        ds = dataset.generate(cfg, s["feature_set"])
        X, names, y, fams, labels = ds.X, ds.feature_names, ds.y, ds.family, ds.labels
        counts = {"BE": int(ds.y.sum()), "SEP": int((ds.y == 0).sum()), **cfg.family_counts()}
    path = out / "dataset.csv"
    io.write_dataset_csv(path, X, names, y, list(fams), labels)
    s = dict(s, counts=counts)
    _write_manifest(out, "generate", s, [path])
    print(f"wrote {len(y)} rows to {path}")
    return EXIT_OK


def cmd_train(s: dict) -> int:
    if not s["dataset"]:
        raise ConfigError("train needs a dataset file")
    out = _outdir(s, "train")
    X, names, y, fam, _ = io.read_dataset_csv(s["dataset"])
    Xm, model_names = (features.poly2_matrix(X), features.poly2_names(names)) if s["poly2"] else (X, names)
    if s["kind"] == "RandomForest":
        depth = int(s["max_depth"]) if str(s["max_depth"]).strip() else None
        cfg = {"kind": "RandomForest", "n_trees": s["n_trees"], "max_depth": depth,
               "features_per_split": s["features_per_split"], "rng_seed": s["seed"]}
    elif s["kind"] == "LogRegEN":
        cfg = {"kind": "LogRegEN", "lam1": s["lam1"], "lam2": s["lam2"]}
    else:
        raise ConfigError(f"unknown model kind {s['kind']!r}")
    model = protocol.train(Xm, y, model_names, cfg)
    model.training_config.update({"poly2": bool(s["poly2"]), "input_features": list(names)})
    path = out / "model.json"
    path.write_text(model.to_json())
    _write_manifest(out, "train", s, [path])
    print(f"trained {s['kind']} on {len(y)} rows; model at {path}")
    return EXIT_OK


def cmd_eval(s: dict) -> int:
    if not s["dataset"] or not s["model"]:
        raise ConfigError("eval needs both a dataset and a model file")
    out = _outdir(s, "eval")
    model = protocol.ClassifierModel.from_json(Path(s["model"]).read_text())
    X, names, y, fam, _ = io.read_dataset_csv(s["dataset"])
    expected = model.training_config.get("input_features", list(model.feature_names))
    protocol.check_feature_names(expected, names)
    if model.training_config.get("poly2"):
        X, names = features.poly2_matrix(X), features.poly2_names(names)
    report = protocol.evaluate(model, X, y, fam, names)
    rpath, cpath = out / "report.json", out / "roc.csv"
    io.write_json(rpath, report.to_dict())
    fpr, tpr = zip(*report.roc_points)
    io.write_xy_csv(cpath, fpr, tpr)
    _write_manifest(out, "eval", s, [rpath, cpath])
    print(json.dumps({"auc": report.auc, "recall_at_zero_fp": report.recall_at_zero_fp}))
    return EXIT_OK


def _load_state(s: dict):
    if s["state_json"]:
        rho, _ = io.state_from_json(Path(s["state_json"]).read_text())
        return rho, Path(s["state_json"]).stem
    fam = s["family"]
    if fam not in FAMILY_BUILDERS:
        raise ConfigError(f"unknown family {fam!r}; choose from {sorted(FAMILY_BUILDERS)}")
    params = _parse_params(s["params"])
    if fam == "chessboard":
        params = [int(p) if float(p).is_integer() else p for p in params]
    try:
        rho = FAMILY_BUILDERS[fam](*params)
    except TypeError as exc:
        raise ConfigError(f"wrong number of parameters for {fam}: {params}") from exc
    return rho, f"{fam}({s['params']})"


def cmd_certify(s: dict) -> int:
    out = _outdir(s, "certify")
    rho, sid = _load_state(s)
    budget = certify.PAPER_BUDGET if s["paper_budget"] else certify.Budget(
        restarts=s["restarts"], steps_per_phase=(s["steps"],) * 3, seed=s["seed"])
    rep = certify.certify(rho, sid, K=s["terms"], budget=budget)
    path = out / "certification.json"
    io.write_json(path, json.loads(rep.to_json()))
    _write_manifest(out, "certify", s, [path])
    print(rep.to_json())
    return EXIT_OK


def cmd_calibrate(s: dict) -> int:
    out = _outdir(s, "calibrate")
    outputs = []
    if s["scheme"] == "two_stage":
        th = np.radians([0, 15, 30, 45, 60, 90])
        data = noisecal.simulate_moment_measurements(th, shots=100_000, rng_seed=s["seed"])
        fit = noisecal.two_stage_mle(data, th.tolist())
    elif s["scheme"] == "per_circuit":
        theory = noisecal.calibration_theory()
        if s["raw"]:
            raw = noisecal.read_raw_csv(s["raw"])
        else:
            rng = np.random.default_rng(s["seed"])
            tests = {"horodecki_0.50": qstate.make_horodecki(0.5), "horodecki_0.70": qstate.make_horodecki(0.7),
                     "horodecki_0.90": qstate.make_horodecki(0.9),
                     "chess_C1": qstate.make_chessboard(*noisecal.CHESS_C1),
                     "chess_C2": qstate.make_chessboard(*noisecal.CHESS_C2)}
            truth = {k: noisecal.feature_values(v) for k, v in tests.items()}
            raw = {**noisecal.simulate_raw_features(theory, repeats=s["repeats"], rng=rng),
                   **noisecal.simulate_raw_features(truth, repeats=s["repeats"], rng=rng)}
            rpath = out / "raw_features.csv"
            noisecal.write_raw_csv(rpath, raw)
            outputs.append(rpath)
        cal = {k: v for k, v in raw.items() if k in theory}
        test = {k: v for k, v in raw.items() if k not in theory}
        fit = noisecal.per_circuit_mle(cal, test, theory, rng_seed=s["seed"])
    else:
        raise ConfigError(f"unknown calibration scheme {s['scheme']!r}")
    path = out / "calibration.json"
    path.write_text(fit.to_json())
    outputs.append(path)
    _write_manifest(out, "calibrate", s, outputs)
    print(json.dumps(fit.degradation))
    return EXIT_OK


def cmd_reproduce(s: dict, table_id: str) -> int:
    out = _outdir(s, "reproduce")
    rep = reproduce.run(table_id, scale=s["scale"], n_trees=s["n_trees"], n_states=s["n_states"], seed=s["seed"])
    print(rep.text())
    path = out / f"{table_id}.json"
    io.write_json(path, rep.to_dict())
    _write_manifest(out, "reproduce", dict(s, table_id=table_id), [path])
    return EXIT_OK if rep.passed else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chiralent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI file with [global] and per-command sections")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")

    g = sub.add_parser("generate", help="regenerate a certified BE/SEP dataset")
    common(g)
    g.add_argument("--scale", type=float)
    g.add_argument("--full-scale", dest="full_scale", action="store_const", const=True)
    g.add_argument("--feature-set", dest="feature_set", choices=["CORE8", "EXT83"])
    g.add_argument("--grid", help="family:lo:hi:n parameter sweep instead of the mixed dataset")

    t = sub.add_parser("train", help="train a classifier on a dataset CSV")
    common(t)
    t.add_argument("--dataset")
    t.add_argument("--kind", choices=["RandomForest", "LogRegEN"])
    t.add_argument("--no-poly2", dest="poly2", action="store_const", const=False)
    t.add_argument("--n-trees", dest="n_trees", type=int)
    t.add_argument("--lam1", type=float)

    e = sub.add_parser("eval", help="evaluate a model on a dataset CSV")
    common(e)
    e.add_argument("--dataset")
    e.add_argument("--model")

    c = sub.add_parser("certify", help="Carathéodory distance and product-vector gap for one state")
    common(c)
    c.add_argument("--state-json", dest="state_json")
    c.add_argument("--family", choices=sorted(FAMILY_BUILDERS))
    c.add_argument("--params", help="comma-separated family parameters")
    c.add_argument("--terms", type=int, help="number of product terms K")
    c.add_argument("--restarts", type=int)
    c.add_argument("--steps", type=int)
    c.add_argument("--paper-budget", dest="paper_budget", action="store_const", const=True)

    k = sub.add_parser("calibrate", help="maximum-likelihood fidelity calibration")
    common(k)
    k.add_argument("--raw", help="raw measurement CSV (state_id, circuit_tag, shots, p0_estimate)")
    k.add_argument("--scheme", choices=["per_circuit", "two_stage"])
    k.add_argument("--repeats", type=int)

    r = sub.add_parser("reproduce", help="compare computed values with the published anchors")
    common(r)
    r.add_argument("table_id", choices=sorted(reproduce.TABLES))
    r.add_argument("--scale", type=float)
    r.add_argument("--n-trees", dest="n_trees", type=int)
    r.add_argument("--n-states", dest="n_states", type=int)
    return p


COMMANDS = {"generate": cmd_generate, "train": cmd_train, "eval": cmd_eval, "certify": cmd_certify,
            "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "config", "table_id")}
    try:
        settings = config.load(args.config, args.command, opts)
        if args.command == "reproduce":
            return cmd_reproduce(settings, args.table_id)
        return COMMANDS[args.command](settings)
    except SchemaMismatchError as exc:
        print(f"error: schema mismatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ChiralentError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
