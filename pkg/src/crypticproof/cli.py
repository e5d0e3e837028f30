"""Command-line entry points: solve, verify, eval and partial."""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .data import load_cryptonite
from .evalharness import EmbeddingStore, evaluate, knn_solver, partial_fill
from .gateway import ConfigError, Gateway, HTTPBackend, ModelEndpoint, PromptBundle, ScriptedBackend
from .knowledge import KnowledgeBase
from .pipeline import PipelineConfig, solve_clue
from .verifier import verify_source

log = logging.getLogger("crypticproof")


@dataclass
class Settings:
    endpoint: ModelEndpoint | None = None
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    wordplay_temperature: float = 1.0
    formalise_temperature: float = 0.2
    synonym_oracle: bool = True
    kb_dir: Path | None = None
    prompts_dir: Path | None = None
    wordlist: Path | None = None
    workers: int = 1


def _typed(section: configparser.SectionProxy, cls) -> dict:
    out = {}
    for f in fields(cls):
        if f.name not in section or not f.init:
            continue
        raw = section[f.name]
        kind = f.type if isinstance(f.type, str) else f.type.__name__
        if kind.startswith("int"):
            out[f.name] = None if raw.strip().lower() in ("", "none") else int(raw)
        elif kind.startswith("float"):
            out[f.name] = float(raw)
        else:
            out[f.name] = raw.strip()
    return out


def load_settings(path: str | Path | None) -> Settings:
    """Read an INI file with ``[endpoint]``, ``[pipeline]`` and ``[resources]`` sections.

    The API key is never stored in the file: ``api_key_env`` names the
    environment variable to read it from.
    """
    settings = Settings()
    if path is None:
        return settings
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise ConfigError(f"cannot read config file {path}")
    base = Path(path).resolve().parent
    try:
        if cp.has_section("endpoint"):
            settings.endpoint = ModelEndpoint(**_typed(cp["endpoint"], ModelEndpoint))
        if cp.has_section("pipeline"):
            sec = cp["pipeline"]
            settings.pipeline = PipelineConfig(**_typed(sec, PipelineConfig))
            settings.wordplay_temperature = sec.getfloat("wordplay_temperature", 1.0)
            settings.formalise_temperature = sec.getfloat("formalise_temperature", 0.2)
            settings.synonym_oracle = sec.getboolean("synonym_oracle", True)
            settings.workers = sec.getint("workers", 1)
        if cp.has_section("resources"):
            sec = cp["resources"]
            for key, attr in (("kb", "kb_dir"), ("prompts", "prompts_dir"), ("wordlist", "wordlist")):
                if sec.get(key):
                    setattr(settings, attr, base / sec[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return settings


def build_runtime(settings: Settings, fixtures: str | None) -> tuple[KnowledgeBase, Gateway]:
    """Scripted fixtures take precedence over a configured endpoint."""
    if fixtures:
        backend = ScriptedBackend.from_file(fixtures)
    elif settings.endpoint is not None:
        backend = HTTPBackend(settings.endpoint)
    else:
        raise ConfigError("either --fixtures or a config file with an [endpoint] section is required")
    bundle = PromptBundle.load(settings.prompts_dir)
    bundle.check(rewrite=settings.pipeline.max_rewrites > 0)
    gateway = Gateway(backend, bundle, settings.pipeline.answer_temperature,
                      settings.wordplay_temperature, settings.formalise_temperature)
    oracle = gateway.synonym_oracle if settings.synonym_oracle and not fixtures else None
    return KnowledgeBase.load(settings.kb_dir, synonym_oracle=oracle), gateway


def read_wordlist(path: Path | None) -> list[str]:
    if path is None:
        text = (resources.files("crypticproof") / "resources" / "kb" / "wordlist.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, ensure_ascii=False, default=str)
    sys.stdout.write("\n")


def cmd_solve(args) -> int:
    settings = load_settings(args.config)
    kb, gateway = build_runtime(settings, args.fixtures)
    result = solve_clue(args.clue, args.pattern, args.ad, settings.pipeline, kb, gateway)
    _emit(result.to_dict())
    return 0


def cmd_verify(args) -> int:
    kb = KnowledgeBase.load(args.kb)
    source = Path(args.proof).read_text(encoding="utf-8")
    _, report = verify_source(source, kb)
    _emit(report.to_dict())
    return 0 if report.success else 1


def _records(args):
    errors = []
    records = list(load_cryptonite(args.dataset, args.split, errors=errors))
    if errors:
        log.warning("%d invalid records skipped", len(errors))
    return records


def cmd_eval(args) -> int:
    settings = load_settings(args.config)
    kb, gateway = build_runtime(settings, args.fixtures)
    records = _records(args)

    def solver(r):
        return solve_clue(r.clue, r.enumeration, r.orientation.value, settings.pipeline, kb, gateway)

    workers = 1 if args.fixtures else settings.workers
    _emit(evaluate(records, solver, args.n, args.seed, workers).to_dict())
    return 0


def cmd_partial(args) -> int:
    settings = load_settings(args.config)
    records = _records(args)
    if args.knn:
        store = EmbeddingStore.load(None if args.knn == "toy" else args.knn)
        solver = knn_solver(store, read_wordlist(settings.wordlist))
        method = "FastText-style k=1 NN"
    else:
        kb, gateway = build_runtime(settings, args.fixtures)

        def solver(r, mask):
            return solve_clue(r.clue, r.enumeration, r.orientation.value, settings.pipeline,
                              kb, gateway, mask=mask)

        method = "proof pipeline"
    _emit(partial_fill(records, args.fraction, args.n, args.seed, solver, method))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crypticproof", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one clue and print the result as JSON")
    s.add_argument("--clue", required=True)
    s.add_argument("--pattern", required=True)
    s.add_argument("--ad", default="A", choices=["A", "D"])
    s.add_argument("--config")
    s.add_argument("--fixtures")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="verify a proof file; exit 0 iff it succeeds")
    v.add_argument("--proof", required=True)
    v.add_argument("--kb")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", help="Top-1 accuracy on a seeded sample")
    e.add_argument("--dataset", required=True)
    e.add_argument("--split", default="test", choices=["train", "val", "test"])
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--config")
    e.add_argument("--fixtures")
    e.set_defaults(func=cmd_eval)

    pf = sub.add_parser("partial", help="accuracy with a fraction of letters revealed")
    pf.add_argument("--dataset", required=True)
    pf.add_argument("--split", default="test", choices=["train", "val", "test"])
    pf.add_argument("--fraction", type=float, required=True)
    pf.add_argument("--n", type=int, required=True)
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--knn", metavar="EMBEDDINGS",
                    help="embedding file for the nearest-neighbour baseline ('toy' for the bundled one)")
    pf.add_argument("--config")
    pf.add_argument("--fixtures")
    pf.set_defaults(func=cmd_partial)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
