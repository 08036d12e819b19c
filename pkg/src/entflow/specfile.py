"""Parser and serializer for the line-oriented .espec network format.

The document layer stores plain Python tuples (no arrays), so records
compare structurally and parse/serialize round-trips are exact.  Every
diagnostic carries a 1-based line and, where it makes sense, a column.
See docs/FORMAT.md for the normative grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .labels import ANTILINEAR, LINEAR, FunctionalLabel, Linearity, Measurement
from .network import Diagnostic, Network, NetworkBuilder, NetworkError
from .paths import Path, PathStep, start_at_anchor, start_at_input, start_free

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")
_NUM = r"[0-9]+(?:\.[0-9]+)?"
_COMPLEX_RE = re.compile(rf"^[+-]?{_NUM}(?:[+-]{_NUM}i)?$")


class SpecSerializeError(ValueError):
    """A document value cannot be written in the v1 literal grammar."""


# --------------------------------------------------------------------------
# document records


@dataclass(frozen=True)
class TrackRecord:
    index: int
    dim: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class EventRecord:
    kind: str                      # proj | prep | unitary | uniproj
    name: str
    time: int
    dom: tuple[int, ...] | None = None
    cod: tuple[int, ...] | None = None
    track: int | None = None
    linearity: str | None = None   # linear | antilinear
    matrix: tuple[tuple[complex, ...], ...] | None = None
    state: tuple[complex, ...] | None = None
    prep_flag: bool = False
    line: int = field(default=0, compare=False)

    @property
    def tracks(self) -> tuple[int, ...]:
        if self.kind in ("proj", "prep"):
            return self.dom + self.cod
        return (self.track,)


@dataclass(frozen=True)
class InputRecord:
    tracks: tuple[int, ...]
    state: tuple[complex, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class StepRecord:
    event: str
    enter: str | None = None


@dataclass(frozen=True)
class PathRecord:
    name: str
    start_kind: str                 # input | top | anchor
    start_tracks: tuple[int, ...] = ()
    start_anchor: str | None = None
    start_direction: str = "down"
    steps: tuple[StepRecord, ...] = ()
    end: tuple[int, ...] = ()
    end_time: int | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class OutcomeRecord:
    token: str
    matrix: tuple[tuple[complex, ...], ...]
    linearity: str = "antilinear"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MeasurementRecord:
    name: str
    at: str
    outcomes: tuple[OutcomeRecord, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ProtocolRecord:
    name: str
    measure: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CorrectionRecord:
    branch: tuple[str, ...]
    track: int
    matrix: tuple[tuple[complex, ...], ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SpecDocument:
    version: str = "1"
    tracks: tuple[TrackRecord, ...] = ()
    events: tuple[EventRecord, ...] = ()
    inputs: tuple[InputRecord, ...] = ()
    paths: tuple[PathRecord, ...] = ()
    measurements: tuple[MeasurementRecord, ...] = ()
    protocol: ProtocolRecord | None = None
    corrections: tuple[CorrectionRecord, ...] = ()

    # -- conversions to runtime objects ------------------------------------

    def to_network(self) -> Network:
        b = NetworkBuilder()
        for t in self.tracks:
            b.add_track(t.index, t.dim)
        for e in sorted(self.events, key=lambda r: (r.time, min(r.tracks), r.name)):
            if e.kind in ("proj", "prep"):
                label = FunctionalLabel(np.array(e.matrix, dtype=complex),
                                        _linearity(e.linearity or "antilinear"))
                b.add_projector(e.time, e.dom, e.cod, label, name=e.name,
                                is_preparation=e.kind == "prep")
            elif e.kind == "unitary":
                b.add_unitary(e.time, e.track, np.array(e.matrix, dtype=complex),
                              name=e.name)
            elif e.kind == "uniproj":
                b.add_uniprojector(e.time, e.track,
                                   np.array(e.state, dtype=complex), name=e.name,
                                   is_preparation=e.prep_flag)
        for rec in self.inputs:
            b.set_input(rec.tracks, np.array(rec.state, dtype=complex))
        return b.build()

    def path_record(self, name: str) -> PathRecord:
        for p in self.paths:
            if p.name == name:
                return p
        raise KeyError(f"no path named {name!r}")

    def path_for(self, name: str, network: Network | None = None) -> Path:
        rec = self.path_record(name)
        network = network or self.to_network()
        if rec.start_kind == "input":
            start = start_at_input(rec.start_tracks)
        elif rec.start_kind == "top":
            track = rec.start_tracks[0]
            top = max((e.time for e in network.events_on_track(track)),
                      default=network.max_time) + 1
            start = start_free(track, top, "down")
        else:
            start = start_at_anchor(rec.start_anchor, rec.start_direction)
        steps = tuple(PathStep(s.event, enter=s.enter) for s in rec.steps)
        return Path(start, steps, end_tracks=rec.end, end_time=rec.end_time)

    def measurement_record(self, name: str) -> MeasurementRecord:
        for m in self.measurements:
            if m.name == name:
                return m
        raise KeyError(f"no measurement named {name!r}")

    def measurement_for(self, name: str, network: Network | None = None) -> Measurement:
        rec = self.measurement_record(name)
        network = network or self.to_network()
        event = network.event(rec.at)
        dims = tuple(network.dim_of(t) for t in event.tracks)
        outcomes = tuple(
            (o.token, FunctionalLabel(np.array(o.matrix, dtype=complex),
                                      _linearity(o.linearity)))
            for o in rec.outcomes
        )
        return Measurement(dims, outcomes)


def _linearity(text: str) -> Linearity:
    return LINEAR if text == "linear" else ANTILINEAR


# --------------------------------------------------------------------------
# literal helpers


def format_float(x: float) -> str:
    if x == 0.0:
        x = 0.0  # normalize -0.0
    text = repr(float(x))
    if text.endswith(".0"):
        text = text[:-2]
    if any(c in text for c in "eE") or "inf" in text or "nan" in text:
        raise SpecSerializeError(f"value {x!r} has no v1 literal form")
    return text


def format_complex(z: complex) -> str:
    z = complex(z)
    re_part = format_float(z.real)
    if z.imag == 0.0:
        return re_part
    im = format_float(abs(z.imag))
    sign = "-" if z.imag < 0 else "+"
    return f"{re_part}{sign}{im}i"


def parse_complex(text: str) -> complex | None:
    if not _COMPLEX_RE.match(text):
        return None
    if text.endswith("i"):
        body = text[:-1]
        # split at the sign of the imaginary part (skip a leading sign)
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-":
                re_text, im_text = body[:pos], body[pos:]
                return complex(float(re_text), float(im_text))
        return None
    return complex(float(text), 0.0)


def format_vector(values) -> str:
    return "[" + ",".join(format_complex(v) for v in values) + "]"


def format_matrix(rows) -> str:
    return "[" + ",".join(format_vector(r) for r in rows) + "]"


def _parse_vector(text: str) -> tuple[complex, ...] | None:
    if not (text.startswith("[") and text.endswith("]")) or "[" in text[1:]:
        return None
    body = text[1:-1]
    if not body:
        return None
    out = []
    for item in body.split(","):
        z = parse_complex(item)
        if z is None:
            return None
        out.append(z)
    return tuple(out)


def _parse_matrix(text: str) -> tuple[tuple[complex, ...], ...] | None:
    if not (text.startswith("[[") and text.endswith("]]")):
        return None
    body = text[1:-1]
    rows = []
    depth = 0
    current = ""
    chunks = []
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                return None
        if ch == "," and depth == 0:
            chunks.append(current)
            current = ""
        else:
            current += ch
    chunks.append(current)
    width = None
    for chunk in chunks:
        row = _parse_vector(chunk)
        if row is None:
            return None
        if width is None:
            width = len(row)
        elif len(row) != width:
            return None
        rows.append(row)
    return tuple(rows)


def _parse_tracks(text: str) -> tuple[int, ...] | None:
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        return None
    return tuple(parts) if parts else None


# --------------------------------------------------------------------------
# parsing


@dataclass
class ParseResult:
    document: SpecDocument | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


class _Line:
    def __init__(self, number: int, text: str):
        self.number = number
        self.text = text
        self.fields: dict[str, tuple[str, int]] = {}
        self.flags: list[tuple[str, int]] = []
        self.keyword = ""
        self.positional: list[tuple[str, int]] = []

    def col_of(self, token: str, start: int = 0) -> int:
        pos = self.text.find(token, start)
        return pos + 1 if pos >= 0 else 1


_KEYWORDS = ("track", "proj", "prep", "unitary", "uniproj", "input", "path",
             "measurement", "outcome", "protocol", "correction")


def parse(text: str) -> ParseResult:
    """Parse .espec text into a document, or collect line-anchored diagnostics."""
    diags: list[Diagnostic] = []
    lines: list[_Line] = []

    try:
        text.encode("ascii")
    except UnicodeEncodeError as err:
        bad = text[: err.start].count("\n") + 1
        diags.append(Diagnostic("non-ascii", "file contains non-ASCII characters",
                                bad, 1))
        return ParseResult(None, diags)

    for number, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        line = _Line(number, raw)
        tokens = stripped.split()
        line.keyword = tokens[0]
        cursor = 0
        for tok in tokens[1:]:
            col = line.col_of(tok, cursor)
            cursor = col - 1 + len(tok)
            if "=" in tok:
                key, _, value = tok.partition("=")
                line.fields[key] = (value, col)
            else:
                line.flags.append((tok, col))
                line.positional.append((tok, col))
        lines.append(line)

    if not lines:
        return ParseResult(SpecDocument(), diags)

    header = lines[0]
    if header.keyword != "espec" or [t for t, _ in header.positional] != ["1"]:
        diags.append(Diagnostic("bad-header", "expected 'espec 1' header",
                                header.number, 1))
        return ParseResult(None, diags)

    tracks: list[TrackRecord] = []
    events: list[EventRecord] = []
    inputs: list[InputRecord] = []
    paths: list[PathRecord] = []
    measurements: dict[str, MeasurementRecord] = {}
    outcome_records: list[tuple[OutcomeRecord, str, int]] = []
    protocol: ProtocolRecord | None = None
    corrections: list[CorrectionRecord] = []

    def err(line: _Line, code: str, msg: str, col: int = 1) -> None:
        diags.append(Diagnostic(code, msg, line.number, col))

    def need(line: _Line, key: str) -> tuple[str, int] | None:
        if key not in line.fields:
            err(line, "missing-field", f"{line.keyword!r} record needs {key}=")
            return None
        return line.fields[key]

    def get_int(line: _Line, key: str) -> int | None:
        got = need(line, key)
        if got is None:
            return None
        value, col = got
        try:
            return int(value)
        except ValueError:
            err(line, "bad-value", f"{key}= expects an integer, got {value!r}", col)
            return None

    def get_name(line: _Line, key: str) -> str | None:
        got = need(line, key)
        if got is None:
            return None
        value, col = got
        if not _NAME_RE.match(value):
            err(line, "bad-value", f"{key}= is not a valid name: {value!r}", col)
            return None
        return value

    def get_tracks(line: _Line, key: str) -> tuple[int, ...] | None:
        got = need(line, key)
        if got is None:
            return None
        value, col = got
        parsed = _parse_tracks(value)
        if parsed is None:
            err(line, "bad-value", f"{key}= expects track indices, got {value!r}", col)
        return parsed

    def get_matrix(line: _Line, key: str):
        got = need(line, key)
        if got is None:
            return None
        value, col = got
        parsed = _parse_matrix(value)
        if parsed is None:
            err(line, "bad-value", f"{key}= is not a matrix literal", col)
        return parsed

    def get_vector(line: _Line, key: str):
        got = need(line, key)
        if got is None:
            return None
        value, col = got
        parsed = _parse_vector(value)
        if parsed is None:
            err(line, "bad-value", f"{key}= is not a vector literal", col)
        return parsed

    def get_linearity(line: _Line, default: str | None) -> str | None:
        if "linearity" not in line.fields:
            if default is None:
                err(line, "missing-field", f"{line.keyword!r} record needs linearity=")
            return default
        value, col = line.fields["linearity"]
        if value not in ("linear", "antilinear"):
            err(line, "bad-value", f"unknown linearity {value!r}", col)
            return default
        return value

    for line in lines[1:]:
        kw = line.keyword
        if kw not in _KEYWORDS:
            err(line, "unknown-keyword", f"unknown record keyword {kw!r}")
            continue

        if kw == "track":
            if len(line.positional) != 1:
                err(line, "syntax", "track record: 'track <index> dim=<int>'")
                continue
            try:
                index = int(line.positional[0][0])
            except ValueError:
                err(line, "bad-value", f"bad track index {line.positional[0][0]!r}",
                    line.positional[0][1])
                continue
            dim = get_int(line, "dim")
            if dim is None:
                continue
            tracks.append(TrackRecord(index, dim, line.number))

        elif kw in ("proj", "prep"):
            name = get_name(line, "name")
            time = get_int(line, "time")
            dom = get_tracks(line, "dom")
            cod = get_tracks(line, "cod")
            linearity = get_linearity(line, "antilinear")
            matrix = get_matrix(line, "matrix")
            if None in (name, time, dom, cod, matrix):
                continue
            events.append(EventRecord(kw, name, time, dom=dom, cod=cod,
                                      linearity=linearity, matrix=matrix,
                                      prep_flag=kw == "prep", line=line.number))

        elif kw == "unitary":
            name = get_name(line, "name")
            time = get_int(line, "time")
            track = get_int(line, "track")
            matrix = get_matrix(line, "matrix")
            if None in (name, time, track, matrix):
                continue
            events.append(EventRecord(kw, name, time, track=track, matrix=matrix,
                                      line=line.number))

        elif kw == "uniproj":
            name = get_name(line, "name")
            time = get_int(line, "time")
            track = get_int(line, "track")
            state = get_vector(line, "state")
            if None in (name, time, track, state):
                continue
            flag_names = [f for f, _ in line.flags]
            unknown = [f for f in flag_names if f != "prep"]
            if unknown:
                err(line, "bad-value", f"unknown flags {unknown}")
                continue
            events.append(EventRecord(kw, name, time, track=track, state=state,
                                      prep_flag="prep" in flag_names,
                                      line=line.number))

        elif kw == "input":
            trks = get_tracks(line, "tracks")
            state = get_vector(line, "state")
            if None in (trks, state):
                continue
            inputs.append(InputRecord(trks, state, line.number))

        elif kw == "path":
            name = get_name(line, "name")
            start_got = need(line, "start")
            steps_got = need(line, "steps")
            end = get_tracks(line, "end")
            if None in (name, start_got, steps_got, end):
                continue
            start_text, start_col = start_got
            parts = start_text.split(":")
            start_kind = parts[0]
            start_tracks: tuple[int, ...] = ()
            start_anchor = None
            start_direction = "down"
            if start_kind == "input" and len(parts) == 2:
                parsed = _parse_tracks(parts[1])
                if parsed is None:
                    err(line, "bad-value", f"bad start tracks {parts[1]!r}", start_col)
                    continue
                start_tracks = parsed
            elif start_kind == "top" and len(parts) == 2 and parts[1].isdigit():
                start_tracks = (int(parts[1]),)
            elif start_kind == "anchor" and len(parts) in (2, 3):
                start_anchor = parts[1]
                if len(parts) == 3:
                    if parts[2] not in ("up", "down"):
                        err(line, "bad-value", f"bad anchor direction {parts[2]!r}",
                            start_col)
                        continue
                    start_direction = parts[2]
            else:
                err(line, "bad-value", f"bad start spec {start_text!r}", start_col)
                continue
            steps_text, steps_col = steps_got
            steps = []
            bad_step = False
            for chunk in steps_text.split(",") if steps_text else ():
                sub = chunk.split(":")
                if len(sub) == 1 and _NAME_RE.match(sub[0]):
                    steps.append(StepRecord(sub[0]))
                elif len(sub) == 2 and _NAME_RE.match(sub[0]) and sub[1] in ("dom", "cod"):
                    steps.append(StepRecord(sub[0], sub[1]))
                else:
                    err(line, "bad-value", f"bad step {chunk!r}", steps_col)
                    bad_step = True
                    break
            if bad_step:
                continue
            end_time = None
            if "endtime" in line.fields:
                end_time = get_int(line, "endtime")
            paths.append(PathRecord(name, start_kind, start_tracks, start_anchor,
                                    start_direction, tuple(steps), end, end_time,
                                    line.number))

        elif kw == "measurement":
            name = get_name(line, "name")
            at = get_name(line, "at")
            if None in (name, at):
                continue
            if name in measurements:
                err(line, "duplicate", f"measurement {name!r} already defined")
                continue
            measurements[name] = MeasurementRecord(name, at, (), line.number)

        elif kw == "outcome":
            of = get_name(line, "of")
            token = None
            got = need(line, "token")
            if got is not None:
                token = got[0]
            matrix = get_matrix(line, "matrix")
            linearity = get_linearity(line, "antilinear")
            if None in (of, token, matrix):
                continue
            outcome_records.append(
                (OutcomeRecord(token, matrix, linearity, line.number), of, line.number)
            )

        elif kw == "protocol":
            name = get_name(line, "name")
            got = need(line, "measure")
            if None in (name, got):
                continue
            measure = tuple(got[0].split(","))
            if protocol is not None:
                err(line, "duplicate", "protocol already defined")
                continue
            protocol = ProtocolRecord(name, measure, line.number)

        elif kw == "correction":
            got = need(line, "branch")
            track = get_int(line, "track")
            matrix = get_matrix(line, "matrix")
            if None in (got, track, matrix):
                continue
            branch = tuple(got[0].split("."))
            corrections.append(CorrectionRecord(branch, track, matrix, line.number))

    # attach outcomes and resolve references
    for outcome, of, line_no in outcome_records:
        if of not in measurements:
            diags.append(Diagnostic("dangling-ref",
                                    f"outcome references unknown measurement {of!r}",
                                    line_no, 1))
            continue
        rec = measurements[of]
        measurements[of] = MeasurementRecord(rec.name, rec.at,
                                             rec.outcomes + (outcome,), rec.line)

    track_ids = {t.index for t in tracks}
    seen_tracks: set[int] = set()
    for t in tracks:
        if t.index in seen_tracks:
            diags.append(Diagnostic("duplicate", f"track {t.index} defined twice",
                                    t.line, 1))
        seen_tracks.add(t.index)

    event_names = set()
    for e in events:
        if e.name in event_names:
            diags.append(Diagnostic("duplicate", f"event {e.name!r} defined twice",
                                    e.line, 1))
        event_names.add(e.name)
        missing = [tr for tr in e.tracks if tr not in track_ids]
        if missing:
            diags.append(Diagnostic("dangling-ref",
                                    f"event {e.name!r} references unknown tracks {missing}",
                                    e.line, 1))
    for rec in inputs:
        missing = [tr for tr in rec.tracks if tr not in track_ids]
        if missing:
            diags.append(Diagnostic("dangling-ref",
                                    f"input references unknown tracks {missing}",
                                    rec.line, 1))
    path_names = set()
    for p in paths:
        if p.name in path_names:
            diags.append(Diagnostic("duplicate", f"path {p.name!r} defined twice",
                                    p.line, 1))
        path_names.add(p.name)
        for s in p.steps:
            if s.event not in event_names:
                diags.append(Diagnostic("dangling-ref",
                                        f"path step references unknown event {s.event!r}",
                                        p.line, 1))
        if p.start_kind == "anchor" and p.start_anchor not in event_names:
            diags.append(Diagnostic("dangling-ref",
                                    f"anchor references unknown event {p.start_anchor!r}",
                                    p.line, 1))
        missing = [tr for tr in (p.start_tracks + p.end) if tr not in track_ids]
        if missing:
            diags.append(Diagnostic("dangling-ref",
                                    f"path references unknown tracks {missing}",
                                    p.line, 1))
    for m in measurements.values():
        if m.at not in event_names:
            diags.append(Diagnostic("dangling-ref",
                                    f"measurement {m.name!r} attached to unknown "
                                    f"event {m.at!r}", m.line, 1))
    if protocol is not None:
        for name in protocol.measure:
            if name not in measurements:
                diags.append(Diagnostic("dangling-ref",
                                        f"protocol references unknown measurement "
                                        f"{name!r}", protocol.line, 1))

    if diags:
        return ParseResult(None, diags)
    doc = SpecDocument(
        version="1",
        tracks=tuple(sorted(tracks, key=lambda t: t.index)),
        events=tuple(sorted(events, key=lambda e: (e.time, min(e.tracks), e.name))),
        inputs=tuple(sorted(inputs, key=lambda r: r.tracks)),
        paths=tuple(sorted(paths, key=lambda p: p.name)),
        measurements=tuple(sorted(measurements.values(), key=lambda m: m.name)),
        protocol=protocol,
        corrections=tuple(sorted(corrections, key=lambda c: (c.branch, c.track))),
    )
    return ParseResult(doc, [])


# --------------------------------------------------------------------------
# serializing


def serialize(doc: SpecDocument) -> str:
    """Canonical text form: fixed record order, canonical number formatting."""
    out = ["espec 1"]
    for t in sorted(doc.tracks, key=lambda r: r.index):
        out.append(f"track {t.index} dim={t.dim}")
    for e in sorted(doc.events, key=lambda r: (r.time, min(r.tracks), r.name)):
        if e.kind in ("proj", "prep"):
            out.append(
                f"{e.kind} name={e.name} time={e.time} "
                f"dom={','.join(map(str, e.dom))} cod={','.join(map(str, e.cod))} "
                f"linearity={e.linearity or 'antilinear'} "
                f"matrix={format_matrix(e.matrix)}"
            )
        elif e.kind == "unitary":
            out.append(
                f"unitary name={e.name} time={e.time} track={e.track} "
                f"matrix={format_matrix(e.matrix)}"
            )
        else:
            flag = " prep" if e.prep_flag else ""
            out.append(
                f"uniproj name={e.name} time={e.time} track={e.track} "
                f"state={format_vector(e.state)}{flag}"
            )
    for rec in sorted(doc.inputs, key=lambda r: r.tracks):
        out.append(
            f"input tracks={','.join(map(str, rec.tracks))} "
            f"state={format_vector(rec.state)}"
        )
    for p in sorted(doc.paths, key=lambda r: r.name):
        if p.start_kind == "input":
            start = "input:" + ",".join(map(str, p.start_tracks))
        elif p.start_kind == "top":
            start = f"top:{p.start_tracks[0]}"
        else:
            start = f"anchor:{p.start_anchor}"
            if p.start_direction != "down":
                start += f":{p.start_direction}"
        steps = ",".join(
            s.event if s.enter is None else f"{s.event}:{s.enter}" for s in p.steps
        )
        tail = f" endtime={p.end_time}" if p.end_time is not None else ""
        out.append(
            f"path name={p.name} start={start} steps={steps} "
            f"end={','.join(map(str, p.end))}{tail}"
        )
    for m in sorted(doc.measurements, key=lambda r: r.name):
        out.append(f"measurement name={m.name} at={m.at}")
        for o in sorted(m.outcomes, key=lambda r: r.token):
            lin = "" if o.linearity == "antilinear" else f" linearity={o.linearity}"
            out.append(
                f"outcome of={m.name} token={o.token} "
                f"matrix={format_matrix(o.matrix)}{lin}"
            )
    if doc.protocol is not None:
        out.append(
            f"protocol name={doc.protocol.name} "
            f"measure={','.join(doc.protocol.measure)}"
        )
    for c in sorted(doc.corrections, key=lambda r: (r.branch, r.track)):
        out.append(
            f"correction branch={'.'.join(c.branch)} track={c.track} "
            f"matrix={format_matrix(c.matrix)}"
        )
    return "\n".join(out) + "\n"


def validate_document(doc: SpecDocument) -> list[Diagnostic]:
    """Semantic diagnostics: build the network and walk every declared path."""
    from .paths import validate_path

    diags: list[Diagnostic] = []
    try:
        network = doc.to_network()
    except NetworkError as err:
        diags.append(Diagnostic("invalid-network", str(err)))
        return diags
    for p in doc.paths:
        path = doc.path_for(p.name, network)
        for d in validate_path(network, path):
            diags.append(Diagnostic(d.code, f"path {p.name!r}: {d.message}",
                                    p.line, 1))
    for m in doc.measurements:
        event = network.event(m.at)
        if not hasattr(event, "label"):
            diags.append(Diagnostic("invalid-measurement",
                                    f"measurement {m.name!r} is attached to a "
                                    f"non-projector event", m.line, 1))
            continue
        for o in m.outcomes:
            rows, cols = len(o.matrix), len(o.matrix[0]) if o.matrix else 0
            want = (event.label.cod_dim, event.label.dom_dim)
            if (rows, cols) != want:
                diags.append(Diagnostic("bad-dim",
                                        f"outcome {o.token!r} is {rows}x{cols}, "
                                        f"event needs {want[0]}x{want[1]}",
                                        o.line, 1))
        try:
            doc.measurement_for(m.name, network)
        except (ValueError, KeyError) as err:
            diags.append(Diagnostic("invalid-measurement",
                                    f"measurement {m.name!r}: {err}", m.line, 1))
    return diags


def document_from_network(network: Network, *, paths: dict[str, Path] | None = None,
                          measurements: dict[str, tuple[str, Measurement]] | None = None,
                          protocol: tuple[str, tuple[str, ...]] | None = None,
                          corrections: dict[tuple[str, ...], list] | None = None,
                          ) -> SpecDocument:
    """Build a document from runtime objects (for writing compiled output)."""
    from .network import BipartiteProjector, LocalUnitary, UnipartiteProjector

    tracks = tuple(TrackRecord(t.index, t.dim) for t in network.tracks)
    events = []
    for e in network.events:
        if isinstance(e, BipartiteProjector):
            events.append(EventRecord(
                "prep" if e.is_preparation else "proj", e.name, e.time,
                dom=e.dom_tracks, cod=e.cod_tracks,
                linearity=e.label.linearity.value,
                matrix=_matrix_tuple(e.label.matrix),
                prep_flag=e.is_preparation,
            ))
        elif isinstance(e, LocalUnitary):
            events.append(EventRecord("unitary", e.name, e.time, track=e.track,
                                      matrix=_matrix_tuple(e.matrix)))
        elif isinstance(e, UnipartiteProjector):
            events.append(EventRecord("uniproj", e.name, e.time, track=e.track,
                                      state=tuple(complex(z) for z in e.state_vector),
                                      prep_flag=e.is_preparation))
        else:
            raise SpecSerializeError(
                f"event {e.name!r} has no v1 record form (undirected multi-track)"
            )
    inputs = tuple(
        InputRecord(group, tuple(complex(z) for z in vec))
        for group, vec in network.inputs
    )
    path_records = []
    for name, path in (paths or {}).items():
        start = path.start
        if start.kind == "input":
            rec = PathRecord(name, "input", start.tracks,
                             steps=_steps(path), end=path.end_tracks,
                             end_time=path.end_time)
        elif start.kind == "free":
            rec = PathRecord(name, "top", start.tracks, steps=_steps(path),
                             end=path.end_tracks, end_time=path.end_time)
        else:
            rec = PathRecord(name, "anchor", (), start.anchor, start.direction,
                             _steps(path), path.end_tracks, path.end_time)
        path_records.append(rec)
    meas_records = []
    for name, (at, fam) in (measurements or {}).items():
        outs = []
        for token, label in fam.outcomes:
            outs.append(OutcomeRecord(token, _matrix_tuple(label.matrix),
                                      label.linearity.value))
        meas_records.append(MeasurementRecord(name, at, tuple(outs)))
    corr_records = []
    for tokens, event_list in (corrections or {}).items():
        for ev in event_list:
            corr_records.append(CorrectionRecord(tokens, ev.track,
                                                 _matrix_tuple(ev.matrix)))
    return SpecDocument(
        tracks=tracks,
        events=tuple(events),
        inputs=inputs,
        paths=tuple(path_records),
        measurements=tuple(meas_records),
        protocol=None if protocol is None else ProtocolRecord(*protocol),
        corrections=tuple(corr_records),
    )


def _matrix_tuple(matrix) -> tuple[tuple[complex, ...], ...]:
    arr = np.asarray(matrix, dtype=complex)
    return tuple(tuple(complex(z) for z in row) for row in arr)


def _steps(path: Path) -> tuple[StepRecord, ...]:
    return tuple(StepRecord(s.event, s.enter) for s in path.steps)
