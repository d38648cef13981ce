"""CLI: model-adapter serve --model path:callable --transport stdio|http --port P --shape DxL"""

from __future__ import annotations

import argparse
import sys

from .loader import AdapterConfig, parse_model_ref, parse_shape
from .server import serve_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="model-adapter",
        description="Serve a Python model over the batched scoring wire protocol",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    serve = subs.add_parser("serve", description="Start a scoring server.")
    serve.add_argument("--model", required=True, help="<file-path>:<callable>")
    serve.add_argument("--transport", default="stdio", choices=["stdio", "http"])
    serve.add_argument("--port", type=int, default=8000, help="port (http transport)")
    serve.add_argument("--shape", required=True, help="instance shape as DxL, e.g. 8x120")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    model_path, callable_name = parse_model_ref(args.model)
    config = AdapterConfig(
        model_path=model_path,
        callable_name=callable_name,
        shape=parse_shape(args.shape),
        transport=args.transport,
        port=args.port,
    )
    try:
        serve_model(config)
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
