"""Pipeline configuration and the simulate/classify/report stages.

Configuration lives in a flat INI-style key-value file with sections
(``[pipeline]``, ``[dataset]``, ``[aebs]``, ``[preprocess]``,
``[adapters.*]``); every AEBS parameter is overridable there and via
``--set section.key=value`` on the command line.  All stages write
deterministic artifacts: rerunning with the same config yields
byte-identical files.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .aebs import AebsConfig, BrakeEvent, simulate_recording
from .classifier import build_pseudo_ground_truth, classify_event
from .errors import ConfigError, DataError, RecordingParseError
from .metrics import build_agreement_report, render_report_text
from .preprocess import PreparedRecording, PreprocessConfig, prepare_recording
from .store import EventStore, PgtSummary
from .synthetic import generate_synthetic_suite
from .tracks import ColumnAdapters, Recording, load_recording, validate_recording


@dataclass
class PipelineConfig:
    dataset_name: str = "synthetic"
    dataset_dir: Path | None = None
    adapters: ColumnAdapters = field(default_factory=ColumnAdapters)
    synthetic: bool = False
    synthetic_seed: int = 1
    output_dir: Path = Path("out")
    parallelism: int = 1
    documented_collisions: list[str] = field(default_factory=list)
    jerk_bound: float = 50.0
    replay_margin: float = 5.0   # seconds of context before/after the event span
    replay_radius: float = 250.0  # participants within this range of the ego
    aebs: AebsConfig = field(default_factory=AebsConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)


def _coerce(value: str, target_type):
    if target_type is bool:
        lowered = value.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    return target_type(value)


def _apply_section(obj, section: configparser.SectionProxy, what: str):
    fields = {f.name: f for f in dataclasses.fields(obj)}
    for key, raw in section.items():
        if key not in fields:
            raise ConfigError(f"unknown key {what}.{key}")
        ftype = fields[key].type
        base = {"float": float, "int": int, "bool": bool, "str": str}.get(
            ftype if isinstance(ftype, str) else getattr(ftype, "__name__", ""), None)
        if base is None:
            raise ConfigError(f"key {what}.{key} cannot be set from the config file")
        try:
            setattr(obj, key, _coerce(raw, base))
        except ValueError as exc:
            raise ConfigError(f"invalid value for {what}.{key}: {exc}") from None


def load_config(path: str | Path | None = None,
                overrides: list[str] | None = None) -> PipelineConfig:
    """Read the configuration file and apply ``--set`` overrides."""
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep key case
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        parser.read(path)
    for item in overrides or ():
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.strip(), value.strip())

    cfg = PipelineConfig()
    if parser.has_section("pipeline"):
        sec = parser["pipeline"]
        for key, raw in sec.items():
            if key == "output_dir":
                cfg.output_dir = Path(raw)
            elif key == "parallelism":
                cfg.parallelism = int(raw)
            elif key == "synthetic":
                cfg.synthetic = _coerce(raw, bool)
            elif key == "synthetic_seed":
                cfg.synthetic_seed = int(raw)
            elif key == "documented_collisions":
                cfg.documented_collisions = [s.strip() for s in raw.split(",") if s.strip()]
            elif key == "jerk_bound":
                cfg.jerk_bound = float(raw)
            elif key == "replay_margin":
                cfg.replay_margin = float(raw)
            elif key == "replay_radius":
                cfg.replay_radius = float(raw)
            else:
                raise ConfigError(f"unknown key pipeline.{key}")
    if parser.has_section("dataset"):
        sec = parser["dataset"]
        for key, raw in sec.items():
            if key == "name":
                cfg.dataset_name = raw
            elif key == "dir":
                cfg.dataset_dir = Path(raw)
            else:
                raise ConfigError(f"unknown key dataset.{key}")
    if parser.has_section("aebs"):
        _apply_section(cfg.aebs, parser["aebs"], "aebs")
        try:
            cfg.aebs.__post_init__()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if parser.has_section("preprocess"):
        _apply_section(cfg.preprocess, parser["preprocess"], "preprocess")
    if parser.has_section("adapters"):
        for key, raw in parser["adapters"].items():
            if key == "heading_unit":
                if raw not in ("rad", "deg"):
                    raise ConfigError(f"adapters.heading_unit must be rad|deg, got {raw!r}")
                cfg.adapters.heading_unit = raw
            elif key.startswith("class."):
                cfg.adapters.class_aliases[key.split(".", 1)[1]] = raw
            else:
                raise ConfigError(f"unknown key adapters.{key}")
    for stream in ("tracks", "meta", "recording"):
        section = f"adapters.{stream}"
        if parser.has_section(section):
            getattr(cfg.adapters, stream).update(parser[section])
    return cfg


def discover_recordings(dataset_dir: Path) -> list[tuple[Path, Path, Path]]:
    """Find canonical recording triples (``PREFIX_tracks.csv[.gz]`` etc.)."""
    triples = []
    for tracks_path in sorted(dataset_dir.glob("*_tracks.csv*")):
        stem = tracks_path.name
        for ext in (".csv.gz", ".csv"):
            if stem.endswith("_tracks" + ext):
                prefix = stem[: -len("_tracks" + ext)]
                meta = _first_existing(dataset_dir, f"{prefix}_tracksMeta")
                recmeta = _first_existing(dataset_dir, f"{prefix}_recordingMeta")
                if meta is None or recmeta is None:
                    raise DataError(f"incomplete recording triple for prefix {prefix!r} "
                                    f"in {dataset_dir}")
                triples.append((tracks_path, meta, recmeta))
                break
    return triples


def _first_existing(root: Path, stem: str) -> Path | None:
    for ext in (".csv", ".csv.gz"):
        p = root / (stem + ext)
        if p.exists():
            return p
    return None


def load_dataset(cfg: PipelineConfig) -> list[Recording]:
    if cfg.synthetic:
        return [s.recording for s in generate_synthetic_suite(cfg.synthetic_seed)]
    if cfg.dataset_dir is None:
        raise ConfigError("no dataset directory configured (set dataset.dir or pipeline.synthetic)")
    if not cfg.dataset_dir.is_dir():
        raise DataError(f"dataset directory {cfg.dataset_dir} does not exist")
    triples = discover_recordings(cfg.dataset_dir)
    if not triples:
        raise DataError(f"no recordings found in {cfg.dataset_dir}")
    recordings = []
    for tracks_path, meta_path, recmeta_path in triples:
        try:
            recordings.append(load_recording(tracks_path, meta_path, recmeta_path, cfg.adapters))
        except RecordingParseError as exc:
            raise DataError(f"{tracks_path}: {exc}") from exc
    return recordings


def _replay_payload(prepared: PreparedRecording, event: BrakeEvent,
                    cfg: PipelineConfig) -> dict:
    """Observed-data-only top-down replay frames around the event."""
    fps = prepared.fps
    margin = round(cfg.replay_margin * fps)
    span = event.cpr.frame + cfg.aebs.n_steps + margin
    ego_track = prepared.tracks[event.cpr.ego_id]
    frames = []
    for f in range(event.cpr.frame - margin, span + 1):
        ego_state = ego_track.state_at(f)
        if ego_state is None:
            continue
        participants = []
        for tid in prepared.frame_index.get(f, ()):
            st = prepared.tracks[tid].state_at(f)
            if (st.x - ego_state.x) ** 2 + (st.y - ego_state.y) ** 2 > cfg.replay_radius ** 2:
                continue
            meta = prepared.tracks[tid].meta
            participants.append([tid, st.x, st.y, st.psi, meta.length, meta.width,
                                 meta.cls.value])
        frames.append({"frame": f, "participants": participants})
    return {
        "fps": fps,
        "recording_id": prepared.recording_id,
        "ego_id": event.cpr.ego_id,
        "object_id": event.cpr.object_id,
        "level": event.level.value,
        "t0_frame": event.cpr.frame,
        "frames": frames,
    }


def _simulate_one(args) -> tuple[list[BrakeEvent], dict[str, dict]]:
    rec, cfg = args
    prepared = prepare_recording(rec, cfg.preprocess)
    events = simulate_recording(prepared, cfg.aebs, dataset=cfg.dataset_name,
                                documented_collisions=cfg.documented_collisions)
    replays = {e.event_id: _replay_payload(prepared, e, cfg) for e in events}
    return events, replays


def simulate_stage(cfg: PipelineConfig, store: EventStore) -> list[BrakeEvent]:
    recordings = load_dataset(cfg)
    jobs = [(rec, cfg) for rec in recordings]
    if cfg.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            results = list(pool.map(_simulate_one, jobs))
    else:
        results = [_simulate_one(job) for job in jobs]
    events: list[BrakeEvent] = []
    replays: dict[str, dict] = {}
    for ev, rp in results:
        events.extend(ev)
        replays.update(rp)
    store.save_events(events)
    store.save_replays(replays)
    return events


def classify_stage(cfg: PipelineConfig, store: EventStore) -> dict:
    events = store.load_events()
    items = {}
    for eid in sorted(events):
        event = events[eid]
        pgt = build_pseudo_ground_truth(event, cfg.aebs)
        cls = classify_event(event, pgt)
        items[eid] = (cls, PgtSummary.from_pgt(pgt))
    store.save_classifications(items)
    return items


def report_stage(cfg: PipelineConfig, store: EventStore) -> dict:
    annotations = store.annotations()
    classifications = {eid: cls for eid, (cls, _) in store.load_classifications().items()}
    report = build_agreement_report(annotations, classifications)
    report_path = store.root / "report.json"
    report_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n",
                           encoding="utf-8")
    (store.root / "report.txt").write_text(render_report_text(report), encoding="utf-8")
    return report


@dataclass
class PipelineResult:
    store: EventStore
    n_events: int
    verdicts: dict[str, int]
    report: dict


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Simulate, classify and (when annotations exist) report."""
    store = EventStore(cfg.output_dir)
    events = simulate_stage(cfg, store)
    items = classify_stage(cfg, store)
    report = report_stage(cfg, store)
    verdicts: dict[str, int] = {}
    for cls, _ in items.values():
        verdicts[cls.verdict.value] = verdicts.get(cls.verdict.value, 0) + 1
    return PipelineResult(store=store, n_events=len(events), verdicts=verdicts, report=report)


def validate_dataset(cfg: PipelineConfig) -> dict[str, list[str]]:
    """Run report-only validation over every recording of the dataset."""
    findings: dict[str, list[str]] = {}
    for rec in load_dataset(cfg):
        report = validate_recording(rec, jerk_bound=cfg.jerk_bound)
        findings[rec.recording_id] = [
            f"track {i.track_id}: {i.kind}"
            + (f" at frame {i.frame}" if i.frame is not None else "")
            + f" ({i.message})"
            for i in report.issues
        ]
    return findings
