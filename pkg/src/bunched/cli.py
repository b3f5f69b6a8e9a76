"""Command-line front end: ``bunched VERB INPUT [options]``.

Exit codes: 0 success (provable / valid), 1 negative answer (unprovable /
invalid), 2 resource abort, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .calculus import SYSTEMS, Derivation, SearchBounds, check_report, regimentation_faults
from .measures import measure_all
from .rewriting import normalize
from .search import ABORT, EXHAUSTIVE, PROVABLE, REGIMENTED, SEARCH_SYSTEMS, decide, default_bounds, generate_space
from .syntax import ParseError, canonical_sequent, parse_bunch, parse_sequent, render
from . import transform as tf

OK, NO, ABORTED, BAD_INPUT = 0, 1, 2, 3

STAGES = ("slbi", "regimented", "dlbi-rad", "dlbi")


class InputError(Exception):
    pass


def _bounds(text: str | None) -> SearchBounds | None:
    if text is None:
        return None
    try:
        a, m, d = (int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"--bounds expects a,m,d (three integers), got {text!r}") from None
    return SearchBounds(a, m, d)


def _text(args) -> str:
    if (args.input is None) == (args.file is None):
        raise InputError("give exactly one of an inline input or --file")
    if args.file is not None:
        with open(args.file) as fh:
            return fh.read().strip()
    return args.input


def _load_proof(args) -> Derivation:
    raw = _text(args)
    try:
        return Derivation.from_json(json.loads(raw))
    except json.JSONDecodeError:
        # an inline argument may name a file
        try:
            with open(raw) as fh:
                return Derivation.from_json(json.load(fh))
        except OSError:
            raise InputError("proof input is neither JSON nor a readable file") from None
    except (KeyError, TypeError) as e:
        raise InputError(f"malformed proof JSON: {e}") from None


def _emit(args, payload: dict, human: str) -> None:
    print(json.dumps(payload, sort_keys=True) if args.json else human)


def _write_proof(path: str | None, data: dict) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1)
            fh.write("\n")


# ---------------------------------------------------------------------------
# verbs

def cmd_decide(args) -> int:
    s = parse_sequent(_text(args))
    system = args.system or "dlbi"
    if system not in SEARCH_SYSTEMS:
        raise InputError(f"decide supports {', '.join(SEARCH_SYSTEMS)}")
    res = decide(s, _bounds(args.bounds), system, args.max_nodes, args.workers, args.strategy)
    payload = {"verdict": res.verdict, "sequent": render(s)}
    if args.stats:
        payload["stats"] = res.stats()
    if res.proof is not None:
        _write_proof(args.emit_proof, res.proof.to_json())
        if args.json:
            payload["proof"] = res.proof.to_json()
    human = res.verdict
    if args.stats:
        human += "\n" + "\n".join(f"{k}: {v}" for k, v in res.stats().items())
    if res.proof is not None and not args.emit_proof and not args.json:
        human += "\n" + res.proof.pretty()
    _emit(args, payload, human)
    if args.plot and res.proof is not None:
        plot_proof(res.proof, res.bounds, args.plot)
    return {PROVABLE: OK, ABORT: ABORTED}.get(res.verdict, NO)


def cmd_normalize(args) -> int:
    g = parse_bunch(_text(args))
    nf, log = normalize(g)
    _emit(args, {"input": render(g), "normal": render(nf), "steps": [str(st) for st in log]},
          render(nf))
    return OK


def cmd_measure(args) -> int:
    text = _text(args)
    x = parse_sequent(text) if "|-" in text else parse_bunch(text)
    m = measure_all(x)
    _emit(args, m, " ".join(f"{k}={v}" for k, v in m.items()))
    return OK


def cmd_check(args) -> int:
    d = _load_proof(args)
    system = args.system or "lbi"
    rep = check_report(system, d)
    payload = {"system": system, "valid": rep.ok, "message": rep.message,
               "sequent": render(d.sequent)}
    ok = rep.ok
    if args.regimented and rep.ok:
        faults = regimentation_faults(system, d)
        payload["regimented"] = not faults
        payload["faults"] = faults
        ok = not faults
    human = "valid" if rep.ok else f"invalid: {rep.message}"
    if args.regimented and rep.ok:
        human += "\n" + ("regimented" if ok else "not regimented:\n  " + "\n  ".join(payload["faults"]))
    _emit(args, payload, human)
    return OK if ok else NO


def cmd_space(args) -> int:
    s = parse_sequent(_text(args))
    goal = canonical_sequent(s)
    bounds = _bounds(args.bounds) or default_bounds(goal)
    space = generate_space(goal, bounds)
    if args.list:
        items = [render(x) for x in space.sequents(args.limit)]
        _emit(args, {"bounds": str(bounds), "sequents": items}, "\n".join(items))
    else:
        n = space.count(args.limit)
        _emit(args, {"bounds": str(bounds), "count": n}, str(n))
    return OK


def run_pipeline(d: Derivation, source: str, stage: str) -> Derivation:
    """Carry ``d`` (a ``source`` proof) through the pipeline up to ``stage``."""
    if source == "lbi":
        d = tf.lbi_to_slbi(d)
        source = "slbi"
    if stage == "slbi":
        return d
    d = tf.contraction_strategy(d)
    if source in ("slbi", "slbi+"):
        d = tf.regiment(d, source)
        if stage == "regimented":
            return d
        d = tf.eliminate_unit_contractions(d, "slbi+")
    elif stage == "regimented":
        return tf.regiment(d, source)
    if stage == "dlbi-rad":
        return d
    return tf.eliminate_rad(d if source != "dlbi" else tf.regiment(d, "dlbi"))


def cmd_transform(args) -> int:
    d = _load_proof(args)
    source = args.system or "lbi"
    out = run_pipeline(d, source, args.to)
    target = {"slbi": "slbi", "regimented": "slbi+", "dlbi-rad": "dlbi-rad", "dlbi": "dlbi"}[args.to]
    rep = check_report(target, out)
    data = tf.well_label(out).to_json() if args.labels else out.to_json()
    _write_proof(args.emit_proof, data)
    payload = {"stage": args.to, "valid": rep.ok, "sequent": render(out.sequent),
               "size": out.size()}
    if args.json and not args.emit_proof:
        payload["proof"] = data
    _emit(args, payload, out.pretty() if not args.emit_proof else f"wrote {args.emit_proof}")
    return OK if rep.ok else NO


def plot_proof(d: Derivation, bounds: SearchBounds, path: str) -> None:
    """Measures of every sequent against its height in the proof."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        from matplotlib.ticker import MaxNLocator
    except ImportError:
        raise InputError("--plot needs matplotlib (pip install 'artifact[plot]')") from None
    rows = []

    def walk(node, h):
        rows.append((h, measure_all(node.sequent)))
        for c in node.children:
            walk(c, h + 1)

    walk(d, 0)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    limits = {"mu": bounds.a, "omega": bounds.m, "delta": bounds.d}
    for i, name in enumerate(("mu", "omega", "delta")):
        xs = [h for h, _ in rows]
        ys = [m[name] + 0.06 * (i - 1) for _, m in rows]
        line = ax.plot(xs, ys, "o", ms=4, label=name)[0]
        ax.axhline(limits[name], color=line.get_color(), ls=":", lw=1)
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_xlabel("height above the end-sequent")
    ax.set_ylabel("measure (dotted: search bound)")
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bunched", description="Bounded proof search and proof tools for BI.")
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, help_, fn):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input", nargs="?", help="inline input")
        sp.add_argument("--file", "-f", help="read the input from a file")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.set_defaults(fn=fn)
        return sp

    d = verb("decide", "decide a sequent", cmd_decide)
    d.add_argument("--system", choices=SEARCH_SYSTEMS)
    d.add_argument("--bounds", help="a,m,d overriding the default bounds")
    d.add_argument("--emit-proof", metavar="FILE")
    d.add_argument("--stats", action="store_true")
    d.add_argument("--max-nodes", type=int)
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--strategy", choices=(REGIMENTED, EXHAUSTIVE), default=REGIMENTED)
    d.add_argument("--plot", metavar="FILE", help="plot proof measures (needs matplotlib)")

    verb("normalize", "normal form of a bunch", cmd_normalize)
    verb("measure", "multiplicity, width and depth", cmd_measure)

    c = verb("check", "check a proof in interchange JSON", cmd_check)
    c.add_argument("--system", choices=sorted(s for s in SYSTEMS if s != "slbi+") + ["slbi+"])
    c.add_argument("--regimented", action="store_true", help="also require a regimented proof")

    s = verb("space", "size or members of the bounded search space", cmd_space)
    s.add_argument("--bounds")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--count", action="store_true", help="count sequents (default)")
    g.add_argument("--list", action="store_true", help="list sequents")
    s.add_argument("--limit", type=int, help="stop after this many bunches")

    t = verb("transform", "carry an LBI proof through the pipeline", cmd_transform)
    t.add_argument("--to", choices=STAGES, default="dlbi")
    t.add_argument("--system", choices=("lbi", "slbi", "slbi+", "dlbi-rad", "dlbi"),
                   help="system of the input proof (default lbi)")
    t.add_argument("--emit-proof", metavar="FILE")
    t.add_argument("--labels", action="store_true", help="attach depth labels to the output")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return BAD_INPUT
    except (InputError, tf.TransformError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT
    except (MemoryError, OverflowError) as e:
        print(f"aborted: {e or 'out of memory'}", file=sys.stderr)
        return ABORTED


if __name__ == "__main__":
    sys.exit(main())
