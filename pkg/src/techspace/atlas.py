"""Technology-space exports and the end-to-end pipeline.

The pipeline wires corpus ingestion through regression output under a single
config, writing every artifact into one output directory together with a
deterministic run manifest (input hashes, config echo, seed, artifact
hashes). Wall-clock timings go to a separate timings.json so that two runs
with identical inputs produce byte-identical manifests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import networkx as nx
import numpy as np
import pandas as pd
import yaml
from scipy.cluster.hierarchy import average, leaves_list
from scipy.spatial.distance import squareform

from . import advantage as adv_mod
from . import complexity as cx
from . import corpus as corpus_mod
from . import econometrics as em
from . import panel as panel_mod
from . import relatedness as rel
from .errors import DataError, TechspaceError, ValidationError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# technology-space graph

@dataclass(frozen=True)
class SpaceGraph:
    """Node/edge export of the technology space (no layout, no pixels)."""

    nodes: list[dict]  # tech_code, patent_count, i4t_category
    edges: list[dict]  # a, b, weight, kept_reason
    n_components: int

    def to_json_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "n_components": self.n_components,
        }

    def edge_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.edges, columns=["a", "b", "weight", "kept_reason"])


def export_space(prox: rel.ProximityMatrix, patent_counts: dict[str, int],
                 taxonomy: corpus_mod.I4TMap | None = None,
                 threshold: float = 0.25) -> SpaceGraph:
    """Maximum-spanning-tree backbone plus all edges at or above threshold.

    Nodes are technologies with at least one patent. A disconnected
    proximity graph yields a spanning forest (flagged via n_components).
    """
    if not prox.techs:
        raise DataError("empty proximity matrix")
    retained = [t for t in prox.techs if patent_counts.get(t, 0) >= 1]
    idx = {t: j for j, t in enumerate(prox.techs)}
    g = nx.Graph()
    g.add_nodes_from(retained)
    for i, a in enumerate(retained):
        for b in retained[i + 1:]:
            w = float(prox.values[idx[a], idx[b]])
            if w > 0:
                g.add_edge(a, b, weight=w)
    tree_edges = {
        tuple(sorted((a, b)))
        for a, b, _ in nx.maximum_spanning_edges(g, algorithm="kruskal", data=True)
    }
    n_components = nx.number_connected_components(g) if retained else 0
    if n_components > 1:
        log.warning("proximity graph is disconnected: %d components", n_components)

    edges = []
    for a, b in sorted(g.edges()):
        key = tuple(sorted((a, b)))
        w = g.edges[a, b]["weight"]
        if key in tree_edges:
            edges.append({"a": key[0], "b": key[1], "weight": w,
                          "kept_reason": "spanning_tree"})
        elif w >= threshold:
            edges.append({"a": key[0], "b": key[1], "weight": w,
                          "kept_reason": "above_threshold"})
    nodes = [
        {"tech_code": t, "patent_count": int(patent_counts.get(t, 0)),
         "i4t_category": (taxonomy.classify(t) if taxonomy else None)}
        for t in retained
    ]
    return SpaceGraph(nodes=nodes, edges=edges, n_components=n_components)


def export_i4t_heatmap(prox: rel.ProximityMatrix,
                       taxonomy: corpus_mod.I4TMap) -> pd.DataFrame:
    """Category-level mean-proximity matrix, hierarchically ordered.

    Off-diagonal cells average proximity over cross-category code pairs;
    diagonal cells average within-category pairs (1 for singletons). Rows
    and columns are ordered by average-linkage clustering on 1 - proximity.
    Categories with no codes in the corpus are omitted.
    """
    members = {c: [] for c in taxonomy.categories}
    for t in prox.techs:
        cat = taxonomy.classify(t)
        if cat is not None:
            members[cat].append(t)
    cats = [c for c in taxonomy.categories if members[c]]
    if len(cats) < 2:
        raise DataError("need at least two I4T categories with codes present")
    idx = {t: j for j, t in enumerate(prox.techs)}
    n = len(cats)
    mat = np.zeros((n, n))
    for i, ca in enumerate(cats):
        for j, cb in enumerate(cats):
            if i == j:
                codes = members[ca]
                if len(codes) == 1:
                    mat[i, j] = 1.0
                else:
                    vals = [prox.values[idx[a], idx[b]]
                            for k, a in enumerate(codes) for b in codes[k + 1:]]
                    mat[i, j] = float(np.mean(vals))
            else:
                vals = [prox.values[idx[a], idx[b]]
                        for a in members[ca] for b in members[cb]]
                mat[i, j] = float(np.mean(vals))
    dist = 1.0 - mat
    np.fill_diagonal(dist, 0.0)
    dist = (dist + dist.T) / 2  # guard against fp asymmetry
    order = leaves_list(average(squareform(dist, checks=False)))
    ordered = [cats[k] for k in order]
    return pd.DataFrame(mat[np.ix_(order, order)], index=ordered, columns=ordered)


# ---------------------------------------------------------------------------
# pipeline config

DEFAULT_BOXCOX_VARIABLES = (
    "omega", "age", "num_employee", "num_competitor", "num_rta",
    "profit_ratio", "debt_ratio",
)

DEFAULT_REGRESSIONS = (
    {
        "name": "main",
        "dependent": "entry",
        "regressors": ["omega", "tci", "gov", "age", "num_employee",
                       "num_competitor", "num_rta", "profit_ratio", "debt_ratio"],
        "fixed_effects": ["year", "industry"],
    },
)

DEFAULT_SPLITS = (
    {"key": "omega", "scheme": "decile-extremes", "regression": "main"},
)


@dataclass
class PipelineConfig:
    """Everything a full run needs; loadable from a YAML file."""

    patents: str
    firms: str
    support: str
    taxonomy: str
    out_dir: str
    years: tuple[int, int] | None = None  # inclusive corpus range
    cpc_level: object = 4
    schema_columns: dict = field(default_factory=dict)
    proximity_window: int = 1
    density_mean_window: int = 1
    include_incumbents: bool = False
    persistence: int = 2
    entry_lead: int = 2
    n_max: int = cx.DEFAULT_ITERATIONS
    tci_scale: float = cx.DEFAULT_TCI_SCALE
    gov_persistence_window: int = 1
    space_threshold: float = 0.25
    figure2_periods: tuple = cx.DEFAULT_PERIODS
    boxcox_variables: tuple = DEFAULT_BOXCOX_VARIABLES
    regressions: tuple = DEFAULT_REGRESSIONS
    splits: tuple = DEFAULT_SPLITS
    robust_se: bool = False
    seed: int = 0
    threads: int = 1

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise ValidationError("config file must contain a mapping")
        inputs = raw.pop("inputs", {})
        known = set(cls.__dataclass_fields__)
        unknown = [k for k in {**inputs, **raw} if k not in known]
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        merged = {**inputs, **raw}
        if "years" in merged and merged["years"] is not None:
            merged["years"] = tuple(merged["years"])
        for key in ("figure2_periods",):
            if key in merged and merged[key] is not None:
                merged[key] = tuple(tuple(p) for p in merged[key])
        missing = [k for k in ("patents", "firms", "support", "taxonomy", "out_dir")
                   if k not in merged]
        if missing:
            raise ValidationError(f"config lacks required keys: {missing}")
        return cls(**merged)

    def validate(self) -> None:
        for name in ("patents", "firms", "support", "taxonomy"):
            if not Path(getattr(self, name)).exists():
                raise ValidationError(f"input file not found: {getattr(self, name)}")
        if self.years is not None and self.years[0] > self.years[1]:
            raise ValidationError("empty year range")

    def echo(self) -> dict:
        d = asdict(self)
        return json.loads(json.dumps(d, sort_keys=True, default=list))

    def schema(self) -> corpus_mod.SchemaConfig:
        return corpus_mod.SchemaConfig(columns=dict(self.schema_columns),
                                       year_range=self.years)


# ---------------------------------------------------------------------------
# pipeline

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Pipeline:
    """Stage-by-stage executor over one config; stages cache their results."""

    def __init__(self, config: PipelineConfig):
        config.validate()
        self.config = config
        self.out_dir = Path(config.out_dir)
        self._cache: dict[str, object] = {}
        self._written: list[Path] = []
        self.timings: dict[str, float] = {}

    # -- cached intermediate results -------------------------------------

    def _get(self, key: str, build):
        if key not in self._cache:
            t0 = time.perf_counter()
            self._cache[key] = build()
            self.timings[key] = time.perf_counter() - t0
        return self._cache[key]

    @property
    def tables(self):
        def build():
            schema = self.config.schema()
            patents, patent_rejects = corpus_mod.load_patents(self.config.patents, schema)
            firms, firm_rejects = corpus_mod.load_firms(self.config.firms, schema)
            gov, gov_rejects = corpus_mod.load_gov_support(
                self.config.support, schema, self.config.cpc_level,
                self.config.gov_persistence_window)
            taxonomy = corpus_mod.load_taxonomy(self.config.taxonomy)
            return {
                "patents": patents, "firms": firms, "gov": gov,
                "taxonomy": taxonomy,
                "rejects": {"patents": patent_rejects, "firms": firm_rejects,
                            "support": gov_rejects},
            }
        return self._get("ingest", build)

    @property
    def cube(self) -> corpus_mod.CountCube:
        def build():
            cube = corpus_mod.build_counts(
                corpus_mod.merge_families(self.tables["patents"]),
                self.config.cpc_level)
            if cube.df.empty:
                raise DataError("no usable patent records")
            return cube
        return self._get("counts", build)

    @property
    def rta_slices(self) -> dict[int, adv_mod.RtaSlice]:
        return self._get("rta", lambda: {
            y: adv_mod.compute_rta(self.cube, y) for y in self.cube.years()
        })

    @property
    def panel(self) -> pd.DataFrame:
        return self._get("panel", lambda: panel_mod.assemble_panel(
            self.cube, self.tables["firms"], self.tables["gov"],
            self.tables["taxonomy"],
            include_incumbents=self.config.include_incumbents,
            persistence=self.config.persistence,
            entry_lead=self.config.entry_lead,
            proximity_window=self.config.proximity_window,
            density_mean_window=self.config.density_mean_window,
            n_max=self.config.n_max, tci_scale=self.config.tci_scale))

    @property
    def transformed_panel(self) -> tuple[pd.DataFrame, pd.DataFrame]:
        return self._get("boxcox", lambda: panel_mod.box_cox_by_year(
            self.panel, list(self.config.boxcox_variables)))

    # -- artifact writers -------------------------------------------------

    def _write_frame(self, name: str, df: pd.DataFrame, index: bool = False) -> Path:
        path = self.out_dir / name
        df.to_csv(path, index=index)
        self._written.append(path)
        return path

    def _write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.write_text(text)
        self._written.append(path)
        return path

    def _write_json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self._written.append(path)
        return path

    def stage_ingest(self):
        tables = self.tables
        for kind, rej in tables["rejects"].items():
            self._write_frame(f"rejects_{kind}.csv", rej)
        self._write_frame("counts.csv", self.cube.df)

    def stage_rta(self):
        frames = []
        for y, sl in self.rta_slices.items():
            t = sl.to_triplets()
            t.insert(2, "year", y)
            frames.append(t)
        self._write_frame("rta.csv", pd.concat(frames, ignore_index=True))

    def stage_entries(self):
        events = adv_mod.detect_entries(self.rta_slices,
                                        persistence=self.config.persistence)
        self._write_frame("entries.csv", events)

    def stage_proximity(self):
        frames = []
        for y in self.cube.years():
            prox = rel.proximity_for_year(self.cube, y, self.config.proximity_window)
            t = prox.to_triplets()
            t.insert(2, "year", y)
            frames.append(t)
        self._write_frame("proximity.csv", pd.concat(frames, ignore_index=True))

    def stage_density(self):
        dens = rel.density_panel(self.cube,
                                 proximity_window=self.config.proximity_window)
        self._write_frame("density.csv", dens)

    def stage_complexity(self):
        score_frames, tci_frames = [], []
        for y in self.cube.years():
            adv = adv_mod.advantage_matrix(self.rta_slices[y])
            scores = cx.mor(adv, n_max=self.config.n_max)
            sf = scores.to_frame()
            sf.insert(0, "year", y)
            score_frames.append(sf[sf["iteration"].isin([0, self.config.n_max])])
            tci = cx.tci_transform(scores, year=y, scale=self.config.tci_scale)
            tf = tci.table.copy()
            tf.insert(1, "year", y)
            tci_frames.append(tf)
        self._write_frame("complexity_scores.csv",
                          pd.concat(score_frames, ignore_index=True))
        self._write_frame("tci.csv", pd.concat(tci_frames, ignore_index=True))

    def stage_figure2(self):
        fig2 = cx.figure2_dataset(self.cube, self.tables["taxonomy"],
                                  periods=self.config.figure2_periods,
                                  n_max=self.config.n_max)
        self._write_frame("figure2.csv", fig2)

    def stage_panel(self):
        self._write_frame("panel.csv", self.panel)
        transformed, report = self.transformed_panel
        self._write_frame("panel_transformed.csv", transformed)
        self._write_frame("transform_report.csv", report)

    def stage_regress(self):
        transformed, _ = self.transformed_panel
        numeric = [c for c in panel_mod.PANEL_COLUMNS
                   if c in transformed.columns
                   and pd.api.types.is_numeric_dtype(transformed[c])
                   and c != "year"]
        self._write_frame("summary_stats.csv",
                          em.summary_stats(transformed, numeric))
        self._write_frame("correlation.csv",
                          em.correlation_table(transformed, numeric), index=True)
        for reg in self.config.regressions:
            result = self._run_regression(transformed, reg)
            self._write_frame(f"regression_{reg['name']}.csv", result.table)
            self._write_text(f"regression_{reg['name']}.txt", result.to_text() + "\n")
            vif_table = em.vif(transformed, list(reg["regressors"]))
            self._write_frame(f"vif_{reg['name']}.csv", vif_table)

    def stage_split_regress(self):
        transformed, _ = self.transformed_panel
        regs = {r["name"]: r for r in self.config.regressions}
        for sp in self.config.splits:
            reg = regs[sp["regression"]]
            groups = panel_mod.split(transformed, sp["key"], sp["scheme"])
            for label, group in groups.items():
                result = self._run_regression(group, reg)
                stem = f"regression_{reg['name']}_{sp['key']}_{label}"
                self._write_frame(stem + ".csv", result.table)
                self._write_text(stem + ".txt", result.to_text() + "\n")

    def _run_regression(self, data: pd.DataFrame, reg: dict) -> em.RegressionResult:
        spec = em.RegressionSpec(
            dependent=reg["dependent"],
            regressors=tuple(reg["regressors"]),
            fixed_effects=tuple(reg.get("fixed_effects", ())),
            robust=reg.get("robust", self.config.robust_se),
        )
        return em.ols_fe(data, spec)

    def stage_export_space(self):
        years = self.cube.years()
        firms, techs, counts = self.cube.window_slice(years)
        pooled_adv = adv_mod.AdvantageMatrix(
            year=years[-1], firms=firms, techs=techs,
            values=(adv_mod.rta_from_matrix(counts) >= 1.0).astype(np.int8))
        prox = rel.proximity(pooled_adv)
        patent_counts = dict(zip(techs, counts.sum(axis=0)))
        graph = export_space(prox, patent_counts, self.tables["taxonomy"],
                             threshold=self.config.space_threshold)
        self._write_json("space.json", graph.to_json_dict())
        self._write_frame("space_edges.csv", graph.edge_frame())
        self._cache["space_prox"] = prox

    def stage_export_heatmap(self):
        if "space_prox" not in self._cache:
            self.stage_export_space()
        heat = export_i4t_heatmap(self._cache["space_prox"], self.tables["taxonomy"])
        self._write_frame("heatmap.csv", heat, index=True)

    STAGES = (
        ("ingest", stage_ingest),
        ("rta", stage_rta),
        ("entries", stage_entries),
        ("proximity", stage_proximity),
        ("density", stage_density),
        ("complexity", stage_complexity),
        ("figure2", stage_figure2),
        ("panel", stage_panel),
        ("regress", stage_regress),
        ("split-regress", stage_split_regress),
        ("export-space", stage_export_space),
        ("export-heatmap", stage_export_heatmap),
    )

    def run(self) -> dict:
        """Execute all stages and write the manifest; returns the manifest."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        lock = self.out_dir / ".techspace.lock"
        if lock.exists():
            raise ValidationError(f"output directory is locked: {lock}")
        lock.write_text("running")
        try:
            for name, stage in self.STAGES:
                t0 = time.perf_counter()
                try:
                    stage(self)
                except TechspaceError as exc:
                    self._remove_partial()
                    raise type(exc)(f"stage {name!r} failed: {exc}") from exc
                except Exception as exc:
                    self._remove_partial()
                    raise TechspaceError(f"stage {name!r} failed: {exc}") from exc
                self.timings[f"stage:{name}"] = time.perf_counter() - t0
            manifest = self._manifest()
            self._write_json("manifest.json", manifest)
            self._write_json("timings.json",
                             {k: round(v, 6) for k, v in sorted(self.timings.items())})
            return manifest
        finally:
            lock.unlink(missing_ok=True)

    def _remove_partial(self):
        for path in self._written:
            path.unlink(missing_ok=True)
        self._written.clear()

    def _manifest(self) -> dict:
        inputs = {
            name: {"path": str(getattr(self.config, name)),
                   "sha256": _sha256(Path(getattr(self.config, name)))}
            for name in ("patents", "firms", "support", "taxonomy")
        }
        artifacts = {
            p.name: {"path": str(p), "sha256": _sha256(p)}
            for p in sorted(self._written)
        }
        return {
            "inputs": inputs,
            "config": self.config.echo(),
            "seed": self.config.seed,
            "artifacts": artifacts,
        }


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every stage under one config; see :class:`Pipeline`."""
    return Pipeline(config).run()
