#!/usr/bin/env python3
"""Minimal embeddings endpoint backed by sentence-transformers.

Accepts POST {"model": ..., "input": [text, ...]} and answers
{"data": [{"index": i, "embedding": [...]}, ...]}, the shape the remote
embedder expects. Point AGRAG_REFERENCE_EMBED_URL at http://HOST:PORT/embeddings.
"""

import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from sentence_transformers import SentenceTransformer


def make_handler(model):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            try:
                texts = json.loads(self.rfile.read(length))["input"]
                if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                    raise ValueError("input must be a list of strings")
            except (ValueError, KeyError) as exc:
                self.send_error(400, str(exc))
                return
            vectors = model.encode(texts, convert_to_numpy=True)
            body = json.dumps(
                {"data": [{"index": i, "embedding": v.tolist()} for i, v in enumerate(vectors)]}
            ).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt, *args):
            pass

    return Handler


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="sentence-transformers/all-MiniLM-L6-v2")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    args = parser.parse_args()
    model = SentenceTransformer(args.model)
    server = ThreadingHTTPServer((args.host, args.port), make_handler(model))
    print(f"serving {args.model} on http://{args.host}:{args.port}/embeddings", flush=True)
    server.serve_forever()


if __name__ == "__main__":
    main()
