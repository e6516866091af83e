"""Command-line interface.

Verbs: ``serve`` (run the HTTP gateway), ``ground`` (one-shot
instruction -> plan on stdout), ``replay`` (run a scenario suite),
``map-check`` (validate a map fixture). Every verb exits 0 on success
and nonzero with a machine-readable JSON error on stderr otherwise;
``ground --mock`` and ``replay`` with the mock need no network.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import load_suite, packaged_suite_path, run_suite
from .config import ConfigError, load_config, packaged_data_path
from .grounding import Grounder
from .llm_provider import HttpProvider, MockProvider
from .plan_schema import canonical_serialize_wrapped
from .prompting import TemplateError, load_template
from .waypoint_world import WorldFormatError, load_world


def _fail(error_kind: str, detail: str, code: int = 1) -> int:
    print(json.dumps({"error_kind": error_kind, "detail": detail}), file=sys.stderr)
    return code


def _add_fixture_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--map",
        default=None,
        help="map fixture path (default: packaged tower2_floor9)",
    )
    parser.add_argument(
        "--template",
        default=None,
        help="prompt template path (default: packaged template)",
    )


def _resolve_world_template(args: argparse.Namespace):
    map_path = Path(args.map) if args.map else packaged_data_path("tower2_floor9.json")
    template_path = (
        Path(args.template) if args.template else packaged_data_path("default_template.json")
    )
    world = load_world(map_path)
    template = load_template(template_path, world)
    return world, template


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    try:
        config = load_config(
            args.config,
            host=args.host,
            port=args.port,
            map_path=Path(args.map) if args.map else None,
            template_path=Path(args.template) if args.template else None,
            console_dir=Path(args.console_dir) if args.console_dir else None,
            realtime=True if args.realtime else None,
            use_mock=True if args.mock else None,
        )
        app = create_app(config)
    except (ConfigError, WorldFormatError, TemplateError) as exc:
        return _fail("config_error", str(exc))
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def _cmd_ground(args: argparse.Namespace) -> int:
    if args.url:
        return _ground_via_gateway(args)
    try:
        world, template = _resolve_world_template(args)
    except (WorldFormatError, TemplateError) as exc:
        return _fail("fixture_error", str(exc))
    if args.mock:
        provider = MockProvider(world)
    else:
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            return _fail("config_error", str(exc))
        if config.use_mock or config.provider is None:
            provider = MockProvider(world)
        else:
            provider = HttpProvider(config.provider)
    outcome = Grounder(world, template, provider).ground(args.instruction)
    if outcome.plan is None:
        return _fail(
            "plan_rejected",
            json.dumps([d.to_json() for d in outcome.defects]),
        )
    print(canonical_serialize_wrapped(outcome.plan))
    return 0


def _ground_via_gateway(args: argparse.Namespace) -> int:
    import httpx

    try:
        response = httpx.post(
            args.url.rstrip("/") + "/v1/missions",
            json={"instruction": args.instruction, "execute": False},
            timeout=60.0,
        )
    except httpx.HTTPError as exc:
        return _fail("gateway_unreachable", str(exc))
    if response.status_code != 200:
        return _fail("gateway_error", response.text)
    doc = response.json()
    print(
        json.dumps(
            {"response": {"actions": doc["plan"]["actions"]}},
            separators=(",", ":"),
            ensure_ascii=False,
        )
    )
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    suite_path = Path(args.suite)
    if not suite_path.exists():
        packaged = packaged_suite_path(args.suite)
        if packaged.exists():
            suite_path = packaged
        else:
            return _fail("suite_not_found", f"no suite file or packaged suite {args.suite!r}")
    try:
        suite = load_suite(suite_path)
        world, template = _resolve_world_template(args)
    except (ValueError, WorldFormatError, TemplateError) as exc:
        return _fail("fixture_error", str(exc))
    out_dir = Path(args.out) if args.out else Path("bench_out") / suite.name
    report = run_suite(suite, world, template, MockProvider(world), out_dir=out_dir)
    print(report.table_text, end="")
    print(f"reports written to {out_dir}")
    return 0


def _cmd_map_check(args: argparse.Namespace) -> int:
    try:
        world = load_world(args.file)
    except WorldFormatError as exc:
        return _fail("map_invalid", str(exc))
    print(
        f"{world.name}: {len(world.waypoints)} waypoints, {len(world.zones)} zones, "
        f"grid {world.grid.width}x{world.grid.height} @ {world.grid.resolution} m, "
        f"home {world.home!r}, all waypoints reachable"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadplan",
        description="Natural-language mission control for a simulated quadruped.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    serve = sub.add_parser("serve", help="start the HTTP gateway")
    serve.add_argument("--config", default=None, help="service config JSON file")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--mock", action="store_true", help="force the offline mock provider")
    serve.add_argument(
        "--realtime", action="store_true", help="pace simulation at one tick per wall tick"
    )
    serve.add_argument("--console-dir", default=None, help="serve a built console from this dir")
    _add_fixture_args(serve)
    serve.set_defaults(func=_cmd_serve)

    ground = sub.add_parser("ground", help="ground one instruction to a plan")
    ground.add_argument("instruction")
    ground.add_argument("--mock", action="store_true", help="use the offline mock provider")
    ground.add_argument("--config", default=None, help="service config (for a real provider)")
    ground.add_argument("--url", default=None, help="go through a running gateway instead")
    _add_fixture_args(ground)
    ground.set_defaults(func=_cmd_ground)

    replay = sub.add_parser("replay", help="replay a scenario suite with the mock provider")
    replay.add_argument("suite", help="suite file path or packaged suite name")
    replay.add_argument("--out", default=None, help="report output directory")
    _add_fixture_args(replay)
    replay.set_defaults(func=_cmd_replay)

    map_check = sub.add_parser("map-check", help="validate a map fixture file")
    map_check.add_argument("file")
    map_check.set_defaults(func=_cmd_map_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
