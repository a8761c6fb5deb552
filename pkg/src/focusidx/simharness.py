"""Synthetic labeled streams, baselines, and desk-scale experiments.

The generator is calibrated to the observations the pipeline exploits:
a heavily skewed class distribution (a handful of classes covers >= 95%
of objects), feature vectors whose nearest neighbor is the same class
>99% of the time, and a controlled fraction of adjacent near-duplicate
detections.

Costs are abstract GPU units; the defaults put the
ground-truth classifier at 58 units, the generic cheap model 8x below
it, and specialized models a further 10x below that.  The headline
numbers here are therefore directional (speedup factors, orderings),
never the absolute multipliers measured on real video.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import ingest as ingest_mod, tuner as tuner_mod
from .classifiers import ClassifierProfile, make_default_profiles
from .core import AccuracyTarget, Config, DetectedObject
from .errors import InvalidSpec, UsageError
from .evaluation import dominant_classes, evaluate_index
from .query import QuerySession
from .streamio import StreamHeader
from .tuner import ConfigEvaluation, TuneGrid, find_gt_profile


@dataclass(frozen=True)
class StreamSpec:
    n_objects: int = 10_000
    fps: float = 30.0
    vocab: int = 1000
    n_stream_classes: int = 100       # per-stream random class subset size
    zipf_s: float = 2.5               # skew exponent; see decisions ledger
    duplicate_rate: float = 0.2       # exact fraction of adjacent near-duplicates
    objects_per_frame: float = 1.0    # Poisson mean of detections per frame
    segment_class_slots: int = 3      # active class draws per one-second segment
    rare_visitor_rate: float = 0.5    # per-segment chance of a brief rare-class cameo
    dim: int = 64
    sig_dim: int = 16
    class_sigma: float = 0.1          # intra-class feature spread
    seed: int = 0
    stream_id: str = "synthetic"

    def validate(self) -> "StreamSpec":
        if self.n_objects < 0:
            raise InvalidSpec("n_objects must be >= 0")
        if self.n_stream_classes > self.vocab or self.n_stream_classes < 1:
            raise InvalidSpec("need 1 <= n_stream_classes <= vocab")
        if not 0 <= self.duplicate_rate < 1:
            raise InvalidSpec("duplicate_rate must be in [0, 1)")
        if self.fps < 1 or self.objects_per_frame <= 0:
            raise InvalidSpec("fps must be >= 1 and objects_per_frame > 0")
        if self.dim < 1 or self.sig_dim < 1:
            raise InvalidSpec("dim and sig_dim must be >= 1")
        if self.segment_class_slots < 1:
            raise InvalidSpec("segment_class_slots must be >= 1")
        if not 0 <= self.rare_visitor_rate <= 1:
            raise InvalidSpec("rare_visitor_rate must be in [0, 1]")
        return self

    def at_fps(self, fps: float) -> "StreamSpec":
        """Same scene at a lower sampling rate: identical duration, object
        count scaled with the frame rate."""
        n = int(round(self.n_objects * fps / self.fps))
        return replace(self, fps=fps, n_objects=n,
                       stream_id=f"{self.stream_id}@{fps:g}fps")


def generate_stream(spec: StreamSpec) -> tuple[StreamHeader, list[DetectedObject]]:
    """Deterministic synthetic stream with ground-truth labels.

    Exactly round(duplicate_rate * n) detections are near-copies of their
    stream predecessor (same class, pixel signatures within eps/2 of the
    default differencing threshold); every other adjacent pair is
    guaranteed to differ by more than the threshold.
    """
    spec.validate()
    header = StreamHeader(stream_id=spec.stream_id, fps=spec.fps,
                          dim=spec.dim, sig_dim=spec.sig_dim, vocab=spec.vocab)
    n = spec.n_objects
    if n == 0:
        return header, []
    rng = np.random.default_rng([spec.seed, 0xA110])

    classes = rng.choice(spec.vocab, size=spec.n_stream_classes, replace=False)
    weights = np.arange(1, spec.n_stream_classes + 1, dtype=float) ** -spec.zipf_s
    weights /= weights.sum()
    means = rng.standard_normal((spec.n_stream_classes, spec.dim))

    n_dup = int(round(spec.duplicate_rate * n)) if n > 1 else 0
    dup_positions = set()
    if n_dup:
        dup_positions = set((rng.choice(n - 1, size=n_dup, replace=False) + 1).tolist())

    n_base = n - n_dup
    # classes are drawn per one-second segment (a passing object stays in
    # view for a while), detections within the segment pick among the
    # segment's active classes; the marginal class distribution stays Zipf
    base: list[tuple[int, int]] = []  # (frame_id, class index)
    seg_len = max(1, int(round(spec.fps)))
    frame = 0
    active = None
    visitor_left = 0
    visitor_class = 0
    while len(base) < n_base:
        if frame % seg_len == 0 or active is None:
            active = rng.choice(spec.n_stream_classes, size=spec.segment_class_slots,
                                p=weights)
            # continuous per-segment shares keep segment-level recall a
            # smooth function of the classifier's inclusion curve
            shares = rng.dirichlet(np.ones(spec.segment_class_slots))
            # a rare class passing briefly through view: two detections, so
            # its nearest feature neighbor is still its own class
            if rng.random() < spec.rare_visitor_rate:
                visitor_class = int(rng.integers(spec.n_stream_classes))
                visitor_left = 2
        for _ in range(rng.poisson(spec.objects_per_frame)):
            base.append((frame, int(rng.choice(active, p=shares))))
        if visitor_left:
            base.append((frame, visitor_class))
            visitor_left -= 1
        frame += 1
    base = base[:n_base]

    eps = ingest_mod.DEFAULT_PIXEL_EPS
    objects: list[DetectedObject] = []
    base_iter = iter(base)
    for pos in range(n):
        if pos in dup_positions:
            prev = objects[-1]
            sig = prev.pixel_signature + rng.uniform(-eps / 4, eps / 4, spec.sig_dim)
            feature = prev.feature + 0.01 * rng.standard_normal(spec.dim)
            frame_id, ci = prev.frame_id, None
            true_class = prev.true_class
        else:
            frame_id, ci = next(base_iter)
            feature = means[ci] + spec.class_sigma * rng.standard_normal(spec.dim)
            sig = rng.standard_normal(spec.sig_dim)
            # coordinate 0 carries the emission counter: adjacent non-duplicates
            # are guaranteed to differ by > eps in mean absolute difference
            sig[0] = float(pos)
            true_class = int(classes[ci])
        objects.append(DetectedObject(
            object_id=pos,
            frame_id=frame_id,
            timestamp_s=frame_id / spec.fps,
            pixel_signature=sig,
            feature=feature,
            true_class=true_class,
        ))
    return header, objects


# -- spec files (key=value) --------------------------------------------------

_SPEC_FIELDS = {
    "n_objects": int, "fps": float, "vocab": int, "n_stream_classes": int,
    "zipf_s": float, "duplicate_rate": float, "objects_per_frame": float,
    "dim": int, "sig_dim": int, "class_sigma": float, "seed": int,
    "stream_id": str,
}


def parse_spec(text: str) -> StreamSpec:
    kv = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SPEC_FIELDS:
            raise InvalidSpec(f"unknown spec key {key!r}")
        kv[key] = _SPEC_FIELDS[key](value.strip())
    return StreamSpec(**kv).validate()


def format_spec(spec: StreamSpec) -> str:
    return "".join(f"{k}={getattr(spec, k)}\n" for k in _SPEC_FIELDS)


def load_spec(path) -> StreamSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())


# -- baselines ----------------------------------------------------------------

@dataclass(frozen=True)
class BaselineCosts:
    ingest_all_cost: float        # GT on every detected object at ingest time
    query_all_cost_per_class: float  # GT on every in-range object per query


def run_baselines(objects, gt_profile: ClassifierProfile) -> BaselineCosts:
    """Both baselines are pre-filtered by motion detection: the stream
    contains only frames with moving objects already."""
    total = len(objects) * gt_profile.cost_units
    return BaselineCosts(ingest_all_cost=total, query_all_cost_per_class=total)


# -- experiments --------------------------------------------------------------

@dataclass(frozen=True)
class RunResult:
    label: str
    cfg: Config
    ingest_cost: float
    mean_query_cost: float
    precision: float
    recall: float
    ingest_speedup: float
    query_speedup: float
    clusters_emitted: int
    objects_classified: int
    dedup_savings: float


@dataclass(frozen=True)
class ExperimentReport:
    spec: StreamSpec
    targets: AccuracyTarget
    dominant: tuple[int, ...]
    baselines: BaselineCosts
    runs: tuple[RunResult, ...]       # balance / opt_ingest / opt_query
    ablation: tuple[RunResult, ...]   # compressed -> +specialized -> +clustering
    amortized_query_cost_total: float
    standalone_query_cost_total: float
    evaluations: tuple[ConfigEvaluation, ...]

    def run(self, label: str) -> RunResult:
        for r in self.runs + self.ablation:
            if r.label == label:
                return r
        raise KeyError(label)


def _full_run(label, header, objects, cfg, profiles, dominant, baselines,
              pixel_eps, seed) -> RunResult:
    gt = find_gt_profile(profiles)
    idx, report = ingest_mod.ingest_stream(header, objects, cfg, profiles,
                                           pixel_eps=pixel_eps, seed=seed)
    ev = evaluate_index(idx, objects, gt, profiles[cfg.profile_id], header.fps,
                        classes=dominant)
    return RunResult(
        label=label,
        cfg=cfg,
        ingest_cost=report.ingest_cost_units,
        mean_query_cost=ev.mean_query_cost,
        precision=ev.macro_precision,
        recall=ev.macro_recall,
        ingest_speedup=baselines.ingest_all_cost / report.ingest_cost_units,
        query_speedup=baselines.query_all_cost_per_class / ev.mean_query_cost,
        clusters_emitted=report.clusters_emitted,
        objects_classified=report.objects_classified,
        dedup_savings=report.dedup_savings_units,
    )


def run_experiment(spec: StreamSpec,
                   grid: TuneGrid = TuneGrid(),
                   targets: AccuracyTarget = AccuracyTarget(),
                   profiles: dict[str, ClassifierProfile] | None = None,
                   pixel_eps: float = ingest_mod.DEFAULT_PIXEL_EPS,
                   include_ablation: bool = True) -> ExperimentReport:
    """Generate, tune, ingest, query, and score one stream end to end.

    The three policy runs use the tuned Balance / Opt-Ingest / Opt-Query
    configs.  The component ablation re-tunes inside nested search spaces
    (generic-only at T=0, +specialization at T=0, +clustering) and picks
    Opt-Query in each, so the stage-to-stage query-cost ordering reflects
    what each component buys.
    """
    spec.validate()
    header, objects = generate_stream(spec)
    if not objects:
        raise InvalidSpec("experiment needs a non-empty stream")
    if profiles is None:
        profiles = make_default_profiles(spec.vocab)
    gt = find_gt_profile(profiles)
    baselines = run_baselines(objects, gt)
    dominant = dominant_classes(objects)
    seed = spec.seed

    outcome, tres = tuner_mod.tune(header, objects, profiles, targets=targets,
                                   grid=grid, pixel_eps=pixel_eps, seed=seed)
    runs = tuple(
        _full_run(label, header, objects, ev.cfg, tres.profiles, dominant,
                  baselines, pixel_eps, seed)
        for label, ev in (("balance", outcome.balance),
                          ("opt_ingest", outcome.opt_ingest),
                          ("opt_query", outcome.opt_query))
    )

    ablation: tuple[RunResult, ...] = ()
    if include_ablation:
        stages = (
            ("compressed", replace(grid, t_values=(0.0,), specialize=False)),
            ("specialized", replace(grid, t_values=(0.0,), specialize=True)),
            ("clustering", grid),
        )
        stage_runs = []
        sample = tuner_mod.sample_stream(objects, header.fps, seed=seed)
        for label, stage_grid in stages:
            result = tuner_mod.two_step_search(header, sample, profiles,
                                               targets=targets, grid=stage_grid,
                                               pixel_eps=pixel_eps, seed=seed)
            pick = tuner_mod.pareto_and_policies(result.viable).opt_query
            stage_runs.append(_full_run(label, header, objects, pick.cfg,
                                        result.profiles, dominant, baselines,
                                        pixel_eps, seed))
        ablation = tuple(stage_runs)

    # query-rate amortization: verifying each cluster representative at most
    # once lets a session answering every dominant class share GT work
    balance_run = runs[0]
    idx, _ = ingest_mod.ingest_stream(header, objects, balance_run.cfg,
                                      tres.profiles, pixel_eps=pixel_eps, seed=seed)
    obj_by_id = {o.object_id: o for o in objects}
    shared = QuerySession(idx, gt, obj_by_id,
                          ingest_profile=tres.profiles[balance_run.cfg.profile_id])
    amortized = 0.0
    standalone = 0.0
    for cls in dominant:
        amortized += shared.route_query(cls).query_cost_units
        fresh = QuerySession(idx, gt, obj_by_id,
                             ingest_profile=tres.profiles[balance_run.cfg.profile_id])
        standalone += fresh.route_query(cls).query_cost_units

    return ExperimentReport(
        spec=spec,
        targets=targets,
        dominant=tuple(dominant),
        baselines=baselines,
        runs=runs,
        ablation=ablation,
        amortized_query_cost_total=amortized,
        standalone_query_cost_total=standalone,
        evaluations=tres.evaluations,
    )


def accuracy_sweep(spec: StreamSpec, target_values=(0.95, 0.97, 0.99),
                   grid: TuneGrid = TuneGrid()) -> list[tuple[float, ExperimentReport]]:
    return [(v, run_experiment(spec, grid=grid,
                               targets=AccuracyTarget(precision_target=v, recall_target=v),
                               include_ablation=False))
            for v in target_values]


def fps_sweep(spec: StreamSpec, fps_values=(30.0, 10.0, 5.0, 1.0),
              grid: TuneGrid = TuneGrid(),
              targets: AccuracyTarget = AccuracyTarget()) -> list[tuple[float, ExperimentReport]]:
    return [(fps, run_experiment(spec.at_fps(fps), grid=grid, targets=targets,
                                 include_ablation=False))
            for fps in fps_values]


# -- report files -------------------------------------------------------------

def _run_row(r: RunResult) -> str:
    c = r.cfg
    return (f"{r.label},{c.profile_id},{c.l_s},{c.k},{c.t:.6f},{c.m},"
            f"{r.ingest_cost:.6f},{r.mean_query_cost:.6f},"
            f"{r.precision:.6f},{r.recall:.6f},"
            f"{r.ingest_speedup:.6f},{r.query_speedup:.6f},"
            f"{r.clusters_emitted},{r.objects_classified},{r.dedup_savings:.6f}")


_RUN_HEADER = ("label,profile,l_s,k,t,m,ingest_cost,query_cost,precision,recall,"
               "ingest_speedup,query_speedup,clusters,objects_classified,dedup_savings")


def write_report(report: ExperimentReport, outdir) -> None:
    import os
    os.makedirs(outdir, exist_ok=True)

    def put(name, lines):
        with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    put("summary.csv", [_RUN_HEADER] + [_run_row(r) for r in report.runs])
    if report.ablation:
        put("ablation.csv", [_RUN_HEADER] + [_run_row(r) for r in report.ablation])
    put("evaluations.csv",
        ["profile,l_s,k,t,m,recall,precision,ingest_cost,query_cost,viable"]
        + [f"{e.cfg.profile_id},{e.cfg.l_s},{e.cfg.k},{e.cfg.t:.6f},{e.cfg.m},"
           f"{e.est_recall:.6f},{e.est_precision:.6f},"
           f"{e.ingest_cost:.6f},{e.query_cost:.6f},{int(e.viable)}"
           for e in report.evaluations])
    put("meta.csv", [
        "key,value",
        f"stream_id,{report.spec.stream_id}",
        f"n_objects,{report.spec.n_objects}",
        f"fps,{report.spec.fps:.6f}",
        f"precision_target,{report.targets.precision_target:.6f}",
        f"recall_target,{report.targets.recall_target:.6f}",
        f"dominant_classes,{';'.join(str(c) for c in report.dominant)}",
        f"ingest_all_cost,{report.baselines.ingest_all_cost:.6f}",
        f"query_all_cost_per_class,{report.baselines.query_all_cost_per_class:.6f}",
        f"amortized_query_cost_total,{report.amortized_query_cost_total:.6f}",
        f"standalone_query_cost_total,{report.standalone_query_cost_total:.6f}",
    ])


def render_markdown(outdir) -> str:
    """Markdown rendering of the CSVs written by write_report."""
    import os
    parts = []
    for name, title in (("meta.csv", "Experiment"),
                        ("summary.csv", "Policy runs"),
                        ("ablation.csv", "Component ablation (query-optimized)"),
                        ("evaluations.csv", "Grid evaluations")):
        path = os.path.join(outdir, name)
        if not os.path.exists(path):
            continue
        with open(path, "r", encoding="utf-8") as fh:
            rows = [line.split(",") for line in fh.read().splitlines() if line]
        if not rows:
            continue
        parts.append(f"## {title}\n")
        parts.append("| " + " | ".join(rows[0]) + " |")
        parts.append("|" + "---|" * len(rows[0]))
        parts.extend("| " + " | ".join(r) + " |" for r in rows[1:])
        parts.append("")
    if not parts:
        raise UsageError(f"no report CSVs found in {outdir}")
    return "\n".join(parts) + "\n"
