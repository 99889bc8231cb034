"""Command-line client for the pipeline service.

Each subcommand marshals its flags into a service request. By default the
service runs in process; ``--server URL`` sends the same requests to a running
``dforge serve`` instance instead. Exit codes: 0 ok, 2 usage error, 3 data
error, 4 missing upstream artifact.

A ``--config FILE`` of ``key = value`` lines supplies flag defaults (keys are
flag names with dashes or underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from . import __version__

log = logging.getLogger(__name__)


class Client:
    def __init__(self, server: str | None):
        self.server = server
        if server:
            import httpx

            self._http = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette warns about its httpx-based test client; harmless here
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._http = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict[str, Any]) -> tuple[int, dict[str, Any]]:
        resp = self._http.post(path, json=payload)
        try:
            body = resp.json()
        except ValueError:
            body = {"error": {"code": "internal", "message": resp.text, "exit_code": 1}}
        return resp.status_code, body


def _finish(status: int, body: dict[str, Any], render=None) -> int:
    if status >= 400 or "error" in body:
        err = body.get("error") or {}
        print(f"error [{err.get('code', 'internal')}]: {err.get('message', body)}", file=sys.stderr)
        return int(err.get("exit_code", 1))
    if render is not None:
        render(body)
    else:
        print(json.dumps(body, ensure_ascii=False, indent=2))
    return 0


def _read_config_file(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        print(f"error [usage_error]: config file not found: {path}", file=sys.stderr)
        raise SystemExit(2)
    out: dict[str, str] = {}
    for i, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#") or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            print(f"error [usage_error]: {path}: line {i}: expected key = value", file=sys.stderr)
            raise SystemExit(2)
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip().strip("\"'")
    return out


def _apply_config_defaults(parser: argparse.ArgumentParser, conf: dict[str, str]) -> None:
    defaults: dict[str, Any] = {}
    for action in parser._actions:
        key = action.dest
        if key in conf:
            raw = conf[key]
            if action.type is int:
                defaults[key] = int(raw)
            elif action.type is float:
                defaults[key] = float(raw)
            elif isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = raw
            action.required = False  # a configured value satisfies a required flag
    parser.set_defaults(**defaults)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dforge", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"dforge {__version__}")
    ap.add_argument("--server", default=None, help="base URL of a running dforge service")
    ap.add_argument("--config", default=None, help="key=value config file with flag defaults")
    ap.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-dataset", help="normalize a benchmark into canonical JSONL splits")
    p.add_argument("--format", required=True, choices=["mcq", "sciq", "canonical"])
    p.add_argument("--train", required=True, help="train file")
    p.add_argument("--test", default=None, help="test file")
    p.add_argument("--dev", default=None, help="dev file (when the benchmark ships one)")
    p.add_argument("--no-split-dev", action="store_true",
                   help="do not carve a dev split out of train")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("ingest", help="build the sentence index for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="auto", choices=["auto", "text", "jsonl"])
    p.add_argument("--out", required=True)

    p = sub.add_parser("find", help="query an index for sentences containing an anchor")
    p.add_argument("--index", required=True)
    p.add_argument("--anchor", required=True)
    p.add_argument("--limit", type=int, default=8)

    p = sub.add_parser("build-rap", help="build masked pretraining examples")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dataset-format", default="canonical", choices=["mcq", "sciq", "canonical"])
    p.add_argument("--index", required=True)
    p.add_argument("--mode", default="S", choices=["S", "P"])
    p.add_argument("--gtd", action="store_true", help="also anchor on each ground-truth distractor")
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--cap", type=int, default=8, help="max sentences per anchor")
    p.add_argument("--mask-token", default="[MASK]")
    p.add_argument("--input-sep", default="</s>")
    p.add_argument("--target-sep", default="<sep>")
    p.add_argument("--max-passage-tokens", type=int, default=128)
    p.add_argument("--dedup", action="store_true", help="drop exact (input, target) duplicates")
    p.add_argument("--out", required=True)

    p = sub.add_parser("stats", help="per-variant counts of a pretraining examples file")
    p.add_argument("--rap", required=True)

    p = sub.add_parser("retrieve", help="retrieve keyword-matched triplets per item")
    p.add_argument("--kg", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--candidates", default=None)
    p.add_argument("--no-candidates", action="store_true",
                   help="ignore the candidate file (keyword set from stem and answer only)")
    p.add_argument("--embed-requests", default=None,
                   help="also write the embedding request file for the external encoder")
    p.add_argument("--out", required=True)

    p = sub.add_parser("rank", help="order each item's triplets by relevancy")
    p.add_argument("--triplets", required=True)
    p.add_argument("--ranker", default="cosine",
                   choices=["cosine", "classifier", "answer_only", "none"])
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--confidences", default=None)
    p.add_argument("--dataset", default=None, help="needed by --ranker answer_only")
    p.add_argument("--seed", type=int, default=None, help="needed by --ranker none")
    p.add_argument("--blend-alpha", type=float, default=1.0,
                   help="classifier mode: weight of confidence vs cosine (1.0 = confidence only)")
    p.add_argument("--contains", default="exact", choices=["exact", "substring"],
                   help="answer_only mode: endpoint match rule")
    p.add_argument("--out", required=True)

    p = sub.add_parser("make-labels", help="write the triplet classifier training file")
    p.add_argument("--triplets", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--contains", default="exact", choices=["exact", "substring"],
                   help="endpoint match rule for the relevant label")
    p.add_argument("--out", required=True)

    p = sub.add_parser("build-kag", help="serialize triplet-augmented generation inputs")
    p.add_argument("--dataset", required=True)
    p.add_argument("--ranked", required=True)
    p.add_argument("--max-triplets", type=int, default=50)
    p.add_argument("--field-sep", default="</s>")
    p.add_argument("--target-sep", default="<sep>")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score a predictions file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--report-json", default=None)
    p.add_argument("--report-table", default=None)

    p = sub.add_parser("serve", help="run the pipeline service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8437)

    return ap


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    # Pre-scan for --config so its values become parser defaults.
    if "--config" in argv:
        conf_path = argv[argv.index("--config") + 1] if argv.index("--config") + 1 < len(argv) else ""
        conf = _read_config_file(conf_path)
        _apply_config_defaults(parser, conf)
        for sp_action in parser._subparsers._group_actions:  # type: ignore[union-attr]
            for sp in sp_action.choices.values():
                _apply_config_defaults(sp, conf)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    client = Client(args.server)

    if args.command == "prepare-dataset":
        status, body = client.post("/v1/dataset/prepare", {
            "format": args.format, "train_path": args.train, "test_path": args.test,
            "dev_path": args.dev, "split_dev": not args.no_split_dev, "seed": args.seed,
            "train_fraction": args.train_fraction, "out_dir": args.out_dir,
        })
        return _finish(status, body, lambda b: print(
            " ".join(f"{k}={v}" for k, v in b["counts"].items()) + f" -> {args.out_dir}"))

    if args.command == "ingest":
        status, body = client.post("/v1/corpus/ingest", {
            "corpus_path": args.corpus, "format": args.format, "out_path": args.out,
        })
        return _finish(status, body, lambda b: print(
            " ".join(f"{k}={v}" for k, v in b["counts"].items()) + f" -> {args.out}"))

    if args.command == "find":
        status, body = client.post("/v1/corpus/find", {
            "index_path": args.index, "anchor": args.anchor, "limit": args.limit,
        })

        def _render(b: dict) -> None:
            for h in b["hits"]:
                print(f"{h['doc_id']}#{h['sentence_index']}\t{h['text']}")
            if not b["hits"]:
                print("(no matches)")

        return _finish(status, body, _render)

    if args.command == "build-rap":
        status, body = client.post("/v1/rap/build", {
            "dataset_path": args.dataset, "dataset_format": args.dataset_format,
            "index_path": args.index, "out_path": args.out, "mode": args.mode,
            "gtd": args.gtd, "window": args.window, "cap": args.cap,
            "mask_token": args.mask_token, "input_sep": args.input_sep,
            "target_sep": args.target_sep, "max_passage_tokens": args.max_passage_tokens,
            "dedup": args.dedup,
        })
        return _finish(status, body, lambda b: print(
            f"examples={b['counts']['examples']} skipped_anchors={b['counts']['skipped_anchors']}"
            f" -> {args.out}"))

    if args.command == "stats":
        status, body = client.post("/v1/rap/stats", {"rap_path": args.rap})

        def _render_stats(b: dict) -> None:
            print(f"{'variant':<10}{'answer':>8}{'gtd':>8}{'total':>8}")
            for variant, row in sorted(b["by_variant"].items()):
                print(f"{variant:<10}{row['answer']:>8}{row['gtd']:>8}{row['total']:>8}")
            print(f"{'all':<10}{'':>8}{'':>8}{b['total']:>8}")

        return _finish(status, body, _render_stats)

    if args.command == "retrieve":
        status, body = client.post("/v1/kg/retrieve", {
            "kg_path": args.kg, "dataset_path": args.dataset, "out_path": args.out,
            "candidates_path": args.candidates, "use_candidates": not args.no_candidates,
            "embed_requests_path": args.embed_requests,
        })
        return _finish(status, body, lambda b: print(
            " ".join(f"{k}={v}" for k, v in b["counts"].items()) + f" -> {args.out}"))

    if args.command == "rank":
        status, body = client.post("/v1/rank", {
            "triplets_path": args.triplets, "out_path": args.out, "ranker": args.ranker,
            "k": args.k, "embeddings_path": args.embeddings,
            "confidences_path": args.confidences, "dataset_path": args.dataset,
            "seed": args.seed, "blend_alpha": args.blend_alpha, "match": args.contains,
        })
        return _finish(status, body, lambda b: print(
            " ".join(f"{k}={v}" for k, v in b["counts"].items()) + f" -> {args.out}"))

    if args.command == "make-labels":
        status, body = client.post("/v1/rank/labels", {
            "triplets_path": args.triplets, "dataset_path": args.dataset,
            "out_path": args.out, "match": args.contains,
        })
        return _finish(status, body, lambda b: print(
            " ".join(f"{k}={v}" for k, v in b["counts"].items()) + f" -> {args.out}"))

    if args.command == "build-kag":
        status, body = client.post("/v1/kag/build", {
            "dataset_path": args.dataset, "ranked_path": args.ranked, "out_path": args.out,
            "max_triplets": args.max_triplets, "field_sep": args.field_sep,
            "target_sep": args.target_sep,
        })
        return _finish(status, body, lambda b: print(
            " ".join(f"{k}={v}" for k, v in b["counts"].items()) + f" -> {args.out}"))

    if args.command == "evaluate":
        status, body = client.post("/v1/evaluate", {
            "predictions_path": args.predictions, "dataset_path": args.dataset, "k": args.k,
            "report_json_path": args.report_json, "report_table_path": args.report_table,
        })
        return _finish(status, body, lambda b: print(b["table"], end=""))

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
