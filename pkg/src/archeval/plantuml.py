"""Parser and validator for the PlantUML component/deployment subset.

The parser is line oriented. Declarations are collected in a first pass and
arrows are resolved afterwards, so an arrow may name an alias that is declared
further down the file. Nodes created implicitly by arrows (``[X]``, ``:X:``,
``() X``, or bare names in lenient mode) are appended after all declared nodes.

Diagnostic codes
----------------
E_MISSING_DELIMITERS   no ``@startuml`` line.
E_UNBALANCED_BLOCK     unclosed/extra ``}``, missing ``@enduml``, nested ``@startuml``.
E_UNDEFINED_ALIAS      arrow endpoint names nothing declared (strict only).
E_MALFORMED_ARROW      line looks like a relation but does not parse as one.
E_MALFORMED_DECL       declaration without a usable name, or trailing garbage (strict).
E_UNKNOWN_STATEMENT    statement outside the supported subset (strict only).
W_*                    warnings; never affect validity.

Known divergences from the reference renderer: the renderer accepts sequence,
class and activity syntax that this grammar reports as E_UNKNOWN_STATEMENT;
it silently creates nodes for bare names, which strict mode rejects; it
expands preprocessor lines, which are skipped here with W_PREPROCESSOR.
"""

from __future__ import annotations

import enum
import logging
import re
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .model import (
    ArchEdge,
    ArchGraph,
    ArchNode,
    Direction,
    EdgeStyle,
    NodeKind,
    digest_text,
)

log = logging.getLogger(__name__)

DIAGNOSTIC_CODES = {
    "E_MISSING_DELIMITERS": "no @startuml line",
    "E_UNBALANCED_BLOCK": "brace or @startuml/@enduml mismatch",
    "E_UNDEFINED_ALIAS": "arrow endpoint is not declared",
    "E_MALFORMED_ARROW": "relation line does not parse",
    "E_MALFORMED_DECL": "declaration cannot be read",
    "E_UNKNOWN_STATEMENT": "statement outside the supported subset",
    "E_RENDERER": "external renderer rejected the diagram",
    "E_RENDER_TIMEOUT": "external renderer exceeded its time budget",
    "W_IGNORED_DIRECTIVE": "layout/styling directive skipped",
    "W_PREPROCESSOR": "preprocessor line skipped without expansion",
    "W_UNKNOWN_STATEMENT": "unsupported statement skipped (lenient)",
    "W_IMPLICIT_NODE": "bare name created a node (lenient)",
    "W_DUPLICATE_DECL": "node redeclared; first declaration kept",
    "W_MALFORMED_DECL": "declaration tail ignored (lenient)",
    "W_OUTSIDE_BLOCK": "text outside @startuml/@enduml ignored",
    "W_ENCODING": "input was not valid UTF-8; replacement characters used",
}


class ParseMode(str, enum.Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class SyntaxMode(str, enum.Enum):
    INTERNAL_STRICT = "internal_strict"
    INTERNAL_LENIENT = "internal_lenient"
    EXTERNAL_RENDERER = "external_renderer"


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: Severity
    span: SourceSpan
    code: str
    message: str

    def format(self, filename: str = "<input>") -> str:
        return (
            f"{filename}:{self.span.line}:{self.span.column}: "
            f"{self.severity.value} {self.code}: {self.message}"
        )

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "line": self.span.line,
            "column": self.span.column,
            "length": self.span.length,
            "code": self.code,
            "message": self.message,
        }


class ParseError(Exception):
    """Parsing failed; ``diagnostics`` holds everything that was reported."""

    def __init__(self, diagnostics: Sequence[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        first = self.errors[0] if self.errors else None
        super().__init__(first.format() if first else "parse failed")

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]


class MissingDelimiters(ParseError):
    pass


class UnbalancedBlock(ParseError):
    pass


class UndefinedAlias(ParseError):
    pass


class MalformedArrow(ParseError):
    pass


class MalformedDeclaration(ParseError):
    pass


class UnknownStatement(ParseError):
    pass


_ERROR_CLASSES = {
    "E_MISSING_DELIMITERS": MissingDelimiters,
    "E_UNBALANCED_BLOCK": UnbalancedBlock,
    "E_UNDEFINED_ALIAS": UndefinedAlias,
    "E_MALFORMED_ARROW": MalformedArrow,
    "E_MALFORMED_DECL": MalformedDeclaration,
    "E_UNKNOWN_STATEMENT": UnknownStatement,
}


@dataclass
class ParseResult:
    graph: ArchGraph | None
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.graph is not None

    @property
    def warnings(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.WARNING]

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]


# --- grammar ------------------------------------------------------------------

ELEMENT_KEYWORDS = {kind.value: kind for kind in NodeKind if kind is not NodeKind.OTHER}
# Accepted for robustness; all collapse to NodeKind.OTHER.
EXTRA_KEYWORDS = (
    "frame", "storage", "artifact", "file", "card", "agent", "stack", "collections",
    "hexagon", "person", "boundary", "entity", "control", "usecase", "label",
)
_KEYWORD_RE = re.compile(
    r"(?P<kw>" + "|".join(sorted({*ELEMENT_KEYWORDS, *EXTRA_KEYWORDS}, key=len, reverse=True))
    + r")(?![\w$])\s*(?P<rest>.*)$",
    re.IGNORECASE,
)

_NAME_TOKEN = r'\[[^\]]*\]|"[^"]*"|:[^:\s][^:]*:|\(\)\s*"[^"]*"|\(\)\s*[\w$]+|[\w$]+'
_NAME_RE = re.compile(_NAME_TOKEN)
_ARROW = (
    r"(?P<lh><\|?|\*|\+)?"
    r"(?P<body>[-.]+(?:\[[^\]]*\])?[-.]*"
    r"(?:(?P<dir>left|right|up|down|le|ri|do|l|r|u|d)[-.]+)?)"
    r"(?P<rh>\|?>|\*|\+)?"
)
_RELATION_RE = re.compile(
    rf"(?P<src>{_NAME_TOKEN})\s*(?P<arrow>{_ARROW})\s*(?P<dst>{_NAME_TOKEN})"
    r"\s*(?::\s*(?P<label>.*?))?\s*$",
    re.IGNORECASE,
)
_STEREO_RE = re.compile(r"<<(.*?)>>")
_ARROWISH_RE = re.compile(r"[-.]{2,}|->|<-|-\[|\.>|<\.")
_DIRECTIONS = {
    "l": Direction.LEFT, "le": Direction.LEFT, "left": Direction.LEFT,
    "r": Direction.RIGHT, "ri": Direction.RIGHT, "right": Direction.RIGHT,
    "u": Direction.UP, "up": Direction.UP,
    "d": Direction.DOWN, "do": Direction.DOWN, "down": Direction.DOWN,
}

_SINGLE_LINE_DIRECTIVES = {
    "scale", "hide", "show", "remove", "allowmixing", "caption", "set", "skin", "newpage",
    "autonumber", "mainframe",
}
# first word -> terminator of the multi-line form
_BLOCK_DIRECTIVES = {
    "legend": re.compile(r"end\s*legend$", re.IGNORECASE),
    "title": re.compile(r"end\s*title$", re.IGNORECASE),
    "header": re.compile(r"end\s*header$", re.IGNORECASE),
    "footer": re.compile(r"end\s*footer$", re.IGNORECASE),
    "note": re.compile(r"end\s*note$", re.IGNORECASE),
    "rnote": re.compile(r"end\s*r?note$", re.IGNORECASE),
    "hnote": re.compile(r"end\s*h?note$", re.IGNORECASE),
}


@dataclass
class _Decl:
    node_id: str
    display_name: str
    kind: NodeKind
    alias: str | None
    stereotype: str | None
    parent: str | None
    line: int


@dataclass
class _PendingArrow:
    src: str
    dst: str
    arrow: re.Match
    label: str | None
    parent: str | None
    span: SourceSpan


def _line_span(lineno: int, line: str) -> SourceSpan:
    stripped = line.lstrip()
    col = len(line) - len(stripped) + 1
    return SourceSpan(lineno, col, len(stripped.rstrip()))


def _split_lines(text: str) -> list[str]:
    return re.split(r"\r\n|\r|\n", text)


def _unwrap_name(token: str) -> tuple[str, NodeKind | None]:
    """Strip the name-token wrapper; return (name, kind implied by the wrapper)."""
    token = token.strip()
    if token.startswith("[") and token.endswith("]"):
        return token[1:-1].strip(), NodeKind.COMPONENT
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1].strip(), None
    if token.startswith("()"):
        return _unwrap_name(token[2:].strip())[0], NodeKind.INTERFACE
    if token.startswith(":") and token.endswith(":") and len(token) >= 2:
        return token[1:-1].strip(), NodeKind.ACTOR
    return token, None


def _is_wrapped(token: str) -> bool:
    return token[:1] in '["(:'


class _Parser:
    def __init__(self, text: str, mode: ParseMode):
        self.mode = mode
        self.lines = _split_lines(text)
        self.diags: list[ParseDiagnostic] = []
        self.decls: dict[str, _Decl] = {}
        self.order: list[str] = []
        self.arrows: list[_PendingArrow] = []
        self.scopes: list[tuple[str | None, int]] = []

    # diagnostics -----------------------------------------------------------
    def error(self, code: str, span: SourceSpan, message: str) -> None:
        self.diags.append(ParseDiagnostic(Severity.ERROR, span, code, message))

    def warn(self, code: str, span: SourceSpan, message: str) -> None:
        self.diags.append(ParseDiagnostic(Severity.WARNING, span, code, message))

    def strict_or_warn(self, code: str, span: SourceSpan, message: str) -> None:
        if self.mode is ParseMode.STRICT:
            self.error("E_" + code, span, message)
        else:
            self.warn("W_" + code, span, message)

    @property
    def strict(self) -> bool:
        return self.mode is ParseMode.STRICT

    def current_parent(self) -> str | None:
        for node_id, _ in reversed(self.scopes):
            if node_id is not None:
                return node_id
        return None

    # driver ----------------------------------------------------------------
    def run(self) -> ParseResult:
        start = None
        for i, line in enumerate(self.lines):
            if line.strip().lower().startswith("@startuml"):
                start = i
                break
        if start is None:
            self.error(
                "E_MISSING_DELIMITERS",
                _line_span(1, self.lines[0]),
                "no @startuml found",
            )
            return ParseResult(None, self.diags)
        if any(l.strip() for l in self.lines[:start]):
            first = next(i for i, l in enumerate(self.lines[:start]) if l.strip())
            self.warn("W_OUTSIDE_BLOCK", _line_span(first + 1, self.lines[first]),
                      "text before @startuml ignored")
        end = self._body(start + 1)
        if end is None:
            self.error("E_UNBALANCED_BLOCK", _line_span(start + 1, self.lines[start]),
                       "@startuml without matching @enduml")
        else:
            rest = [i for i in range(end + 1, len(self.lines)) if self.lines[i].strip()]
            if rest:
                self.warn("W_OUTSIDE_BLOCK", _line_span(rest[0] + 1, self.lines[rest[0]]),
                          "content after @enduml ignored")
        if any(d.severity is Severity.ERROR for d in self.diags):
            return ParseResult(None, self.diags)
        self._resolve_arrows()
        if any(d.severity is Severity.ERROR for d in self.diags):
            return ParseResult(None, self.diags)
        return ParseResult(self._build(), self.diags)

    def _body(self, i: int) -> int | None:
        lines = self.lines
        n = len(lines)
        while i < n:
            raw = lines[i]
            lineno = i + 1
            stripped = raw.strip()
            span = _line_span(lineno, raw)
            low = stripped.lower()
            if low.startswith("@enduml"):
                if self.scopes:
                    node_id, open_line = self.scopes[-1]
                    self.error("E_UNBALANCED_BLOCK", _line_span(open_line, lines[open_line - 1]),
                               "block opened here is never closed")
                return i
            if low.startswith("@startuml"):
                self.error("E_UNBALANCED_BLOCK", span, "nested @startuml before @enduml")
                i += 1
                continue
            if not stripped or stripped.startswith("'"):
                i += 1
                continue
            if stripped.startswith("/'"):
                if "'/" in stripped[2:]:
                    i += 1
                    continue
                j = i + 1
                while j < n and "'/" not in lines[j]:
                    j += 1
                i = j + 1
                continue
            skip_to = self._directive(i, stripped, span)
            if skip_to is not None:
                i = skip_to
                continue
            skip_to = self._statement(stripped, span, lineno)
            i = skip_to if skip_to is not None else i + 1
        return None

    def _skip_until(self, i: int, pattern: re.Pattern) -> int:
        j = i + 1
        while j < len(self.lines):
            s = self.lines[j].strip()
            if pattern.match(s):
                return j + 1
            if s.lower().startswith("@enduml"):
                return j
            j += 1
        return j

    def _skip_braces(self, i: int) -> int:
        depth = 0
        for j in range(i, len(self.lines)):
            s = self.lines[j]
            if j > i and s.strip().lower().startswith("@enduml"):
                return j
            depth += s.count("{") - s.count("}")
            if depth <= 0:
                return j + 1
        return len(self.lines)

    def _directive(self, i: int, stripped: str, span: SourceSpan) -> int | None:
        """Skip ignorable directives; return the next line index, or None."""
        if stripped.startswith("!"):
            self.warn("W_PREPROCESSOR", span, f"preprocessor line skipped: {stripped[:40]}")
            return i + 1
        if stripped.lower().startswith("<style>"):
            self.warn("W_IGNORED_DIRECTIVE", span, "style block skipped")
            if "</style>" in stripped.lower():
                return i + 1
            return self._skip_until(i, re.compile(r".*</style>", re.IGNORECASE))
        word = re.match(r"[A-Za-z]+", stripped)
        if not word:
            return None
        first = word.group(0).lower()
        rest = stripped[word.end():].strip()
        if first == "skinparam" or first == "sprite":
            self.warn("W_IGNORED_DIRECTIVE", span, f"{first} skipped")
            if "{" in stripped:
                return self._skip_braces(i)
            return i + 1
        if first in ("left", "top", "right", "bottom"):
            if re.match(r"(left|top|right|bottom)\s+to\s+\w+\s+direction\s*$", stripped, re.IGNORECASE):
                self.warn("W_IGNORED_DIRECTIVE", span, "layout direction skipped")
                return i + 1
            return None
        if first in _SINGLE_LINE_DIRECTIVES:
            self.warn("W_IGNORED_DIRECTIVE", span, f"{first} skipped")
            return i + 1
        nxt = stripped[word.end():word.end() + 1]
        if first in _BLOCK_DIRECTIVES and not (nxt.isalnum() or nxt in "_$"):
            self.warn("W_IGNORED_DIRECTIVE", span, f"{first} skipped")
            if first in ("note", "rnote", "hnote"):
                if ":" in rest:
                    return i + 1
                return self._skip_until(i, _BLOCK_DIRECTIVES[first])
            if first == "legend" or not rest:
                return self._skip_until(i, _BLOCK_DIRECTIVES[first])
            return i + 1
        return None

    def _statement(self, s: str, span: SourceSpan, lineno: int) -> int | None:
        """Handle one statement; return a line index to resume at when lines were consumed."""
        if s.startswith("}"):
            if not self.scopes:
                self.error("E_UNBALANCED_BLOCK", span, "'}' without an open block")
            else:
                self.scopes.pop()
            rest = s[1:].strip()
            if rest:
                return self._statement(
                    rest, SourceSpan(span.line, span.column + len(s) - len(rest), len(rest)), lineno
                )
            return None
        if re.match(r"together\s*\{\s*$", s, re.IGNORECASE):
            self.scopes.append((None, lineno))
            return None
        m = _KEYWORD_RE.match(s)
        if m and not re.match(r"[-.<]", m.group("rest")):
            kw = m.group("kw").lower()
            kind = ELEMENT_KEYWORDS.get(kw, NodeKind.OTHER)
            return self._declaration(m.group("rest"), kind, span, lineno)
        rel = _RELATION_RE.match(s)
        if rel and self._arrow_ok(rel):
            src, _ = _unwrap_name(rel.group("src"))
            dst, _ = _unwrap_name(rel.group("dst"))
            if not src or not dst:
                self.error("E_MALFORMED_ARROW", span, "arrow endpoint has an empty name")
                return None
            label = rel.group("label")
            self.arrows.append(
                _PendingArrow(rel.group("src"), rel.group("dst"), rel,
                              label.strip() if label and label.strip() else None,
                              self.current_parent(), span)
            )
            return None
        bare = re.sub(r'\[[^\]]*\]|"[^"]*"', "", s)
        if s[:1] in "[:(" and not _ARROWISH_RE.search(bare):
            first = _NAME_RE.match(s)
            if first and _is_wrapped(first.group(0)):
                kind = _unwrap_name(first.group(0))[1] or NodeKind.COMPONENT
                return self._declaration(s, kind, span, lineno)
        if _ARROWISH_RE.search(bare):
            self.error("E_MALFORMED_ARROW", span, f"cannot read relation: {s[:60]}")
            return None
        self.strict_or_warn("UNKNOWN_STATEMENT", span, f"unsupported statement: {s[:60]}")
        return None

    @staticmethod
    def _arrow_ok(rel: re.Match) -> bool:
        body = re.sub(r"\[[^\]]*\]", "", rel.group("body"))
        has_head = bool(rel.group("lh") or rel.group("rh"))
        return has_head or len(body) >= 2

    def _declaration(self, rest: str, kind: NodeKind, span: SourceSpan, lineno: int) -> int | None:
        first = _NAME_RE.match(rest)
        if not first:
            self.error("E_MALFORMED_DECL", span, "declaration without a name")
            return None
        tail = rest[first.end():]
        second = None
        am = re.match(r"\s+as\s+", tail, re.IGNORECASE)
        if am:
            second = _NAME_RE.match(tail, am.end())
            if not second:
                self.error("E_MALFORMED_DECL", span, "'as' without an alias")
                return None
            tail = tail[second.end():]
        name_a, _ = _unwrap_name(first.group(0))
        if second is None:
            display, alias = name_a, None
        else:
            name_b, _ = _unwrap_name(second.group(0))
            if not _is_wrapped(first.group(0)) and _is_wrapped(second.group(0)):
                display, alias = name_b, name_a
            else:
                display, alias = name_a, name_b
        if not display or (alias is not None and not alias):
            self.strict_or_warn("MALFORMED_DECL", span, "empty element name")
            return None
        brace = re.search(r"[{}]", tail)
        inner = tail[brace.start():] if brace else ""
        tail = tail[: brace.start()] if brace else tail
        stereotypes = _STEREO_RE.findall(tail)
        tail = _STEREO_RE.sub(" ", tail)
        tail = re.sub(r"\[\[.*?\]\]", " ", tail)
        tail = re.sub(r"#[\w:;.#-]+", " ", tail).strip()
        opens = inner.startswith("{")
        if opens:
            inner = inner[1:].strip()
        description = tail == "[" and not inner
        if description:
            tail = ""
        if tail:
            self.strict_or_warn("MALFORMED_DECL", span, f"unexpected text after declaration: {tail[:40]}")
            if self.strict:
                return None
        node_id = alias if alias is not None else display
        parent = self.current_parent()
        stereo = stereotypes[0].strip() if stereotypes else None
        existing = self.decls.get(node_id)
        if existing is None:
            self.decls[node_id] = _Decl(node_id, display, kind, alias, stereo, parent, lineno)
            self.order.append(node_id)
        elif (existing.kind, existing.parent, existing.display_name) != (kind, parent, display):
            self.warn("W_DUPLICATE_DECL", span, f"{node_id!r} already declared on line {existing.line}")
        if opens:
            self.scopes.append((node_id, lineno))
        if inner:
            return self._statement(inner, span, lineno)
        if description:
            # multi-line "[ ... ]" body; its text is not modelled
            j = lineno
            while j < len(self.lines) and self.lines[j].strip() != "]":
                if self.lines[j].strip().lower().startswith("@enduml"):
                    return j
                j += 1
            return j + 1
        return None

    # resolution ------------------------------------------------------------
    def _lookup(self, name: str) -> str | None:
        if name in self.decls:
            return name
        hits = [d.node_id for d in self.decls.values() if d.display_name == name]
        return hits[0] if hits else None

    def _resolve_end(self, token: str, pending: _PendingArrow) -> str | None:
        name, implied = _unwrap_name(token)
        found = self._lookup(name)
        if found is not None:
            return found
        if implied is None:
            if self.strict:
                self.error("E_UNDEFINED_ALIAS", pending.span, f"{name!r} is not declared")
                return None
            self.warn("W_IMPLICIT_NODE", pending.span, f"{name!r} created implicitly")
            implied = NodeKind.COMPONENT
        self.decls[name] = _Decl(name, name, implied, None, None, pending.parent, pending.span.line)
        self.order.append(name)
        return name

    def _resolve_arrows(self) -> None:
        self.edges: list[ArchEdge] = []
        for p in self.arrows:
            src = self._resolve_end(p.src, p)
            dst = self._resolve_end(p.dst, p)
            if src is None or dst is None:
                continue
            m = p.arrow
            body = re.sub(r"\[[^\]]*\]", "", m.group("body"))
            style = EdgeStyle.DASHED if "." in body else EdgeStyle.SOLID
            d = m.group("dir")
            hint = _DIRECTIONS[d.lower()] if d else None
            lh, rh = m.group("lh"), m.group("rh")
            if lh and not rh:
                self.edges.append(ArchEdge(dst, src, p.label, style, hint))
            elif lh and rh:
                self.edges.append(ArchEdge(src, dst, p.label, style, hint))
                self.edges.append(ArchEdge(dst, src, p.label, style, hint))
            else:
                self.edges.append(ArchEdge(src, dst, p.label, style, hint))

    def _build(self) -> ArchGraph:
        nodes = tuple(
            ArchNode(d.node_id, d.display_name, d.kind, d.alias, d.stereotype, d.parent)
            for d in (self.decls[k] for k in self.order)
        )
        return ArchGraph(nodes, tuple(self.edges))


def _decode(text: str | bytes) -> tuple[str, list[ParseDiagnostic]]:
    if isinstance(text, str):
        return text, []
    try:
        return text.decode("utf-8"), []
    except UnicodeDecodeError:
        return text.decode("utf-8", errors="replace"), [
            ParseDiagnostic(Severity.WARNING, SourceSpan(1, 1, 0), "W_ENCODING",
                            "input is not valid UTF-8")
        ]


def parse_with_diagnostics(text: str | bytes, mode: ParseMode | str = ParseMode.STRICT) -> ParseResult:
    """Parse without raising. ``result.graph`` is None when any error was reported."""
    mode = ParseMode(mode)
    decoded, pre = _decode(text)
    parser = _Parser(decoded, mode)
    result = parser.run()
    result.diagnostics = pre + result.diagnostics
    if result.graph is not None:
        result.graph = result.graph.with_digest(digest_text(decoded))
    return result


def parse(text: str | bytes, mode: ParseMode | str = ParseMode.STRICT) -> ArchGraph:
    """Parse diagram source, raising a ParseError subclass named after the first error."""
    result = parse_with_diagnostics(text, mode)
    if result.graph is None:
        cls = _ERROR_CLASSES.get(result.errors[0].code, ParseError) if result.errors else ParseError
        raise cls(result.diagnostics)
    return result.graph


# --- block extraction ---------------------------------------------------------


class NoDiagramFound(ValueError):
    pass


_BLOCK_RE = re.compile(r"@startuml\b.*?@enduml", re.IGNORECASE | re.DOTALL)


def extract_plantuml_blocks(raw: str) -> list[str]:
    return _BLOCK_RE.findall(raw)


def extract_plantuml_block(raw: str, warnings: list[str] | None = None) -> str:
    """Return the first ``@startuml`` .. ``@enduml`` region of a model response.

    Surrounding prose and markdown fences are dropped; the region itself is
    returned unchanged. Extra blocks are reported through ``warnings``.
    """
    blocks = extract_plantuml_blocks(raw)
    if not blocks:
        raise NoDiagramFound("no @startuml/@enduml pair in model output")
    if len(blocks) > 1:
        msg = f"{len(blocks)} diagram blocks found; using the first"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)
    return blocks[0]


# --- validation and external rendering ----------------------------------------


class RendererUnavailable(RuntimeError):
    pass


class RenderTimeout(RuntimeError):
    pass


DEFAULT_RENDERER_ARGS = ("-pipe", "-tpng", "-failfast2")


@dataclass(frozen=True)
class RendererConfig:
    executable: str | Path | None = None
    args: tuple[str, ...] = DEFAULT_RENDERER_ARGS
    timeout: float = 30.0

    def command(self) -> list[str]:
        if not self.executable:
            raise RendererUnavailable("no renderer configured")
        exe = str(self.executable)
        if exe.endswith(".jar"):
            if not Path(exe).is_file():
                raise RendererUnavailable(f"renderer jar not found: {exe}")
            java = shutil.which("java")
            if java is None:
                raise RendererUnavailable("java is required to run a .jar renderer")
            return [java, "-jar", exe, *self.args]
        resolved = shutil.which(exe)
        if resolved is None:
            raise RendererUnavailable(f"renderer executable not found: {exe}")
        return [resolved, *self.args]


@dataclass(frozen=True)
class RenderOutcome:
    success: bool
    returncode: int
    image: bytes
    stderr: str


def render_external(text: str, renderer: RendererConfig) -> RenderOutcome:
    """Run the renderer on ``text`` (stdin) and capture the image (stdout)."""
    cmd = renderer.command()
    try:
        proc = subprocess.run(
            cmd,
            input=text.encode("utf-8"),
            capture_output=True,
            timeout=renderer.timeout,
            check=False,
        )
    except subprocess.TimeoutExpired as exc:
        raise RenderTimeout(f"renderer exceeded {renderer.timeout:g}s") from exc
    except OSError as exc:
        raise RendererUnavailable(str(exc)) from exc
    return RenderOutcome(
        success=proc.returncode == 0,
        returncode=proc.returncode,
        image=proc.stdout,
        stderr=proc.stderr.decode("utf-8", errors="replace"),
    )


@dataclass
class SyntaxReport:
    valid: bool
    diagnostics: list[ParseDiagnostic]
    mode: SyntaxMode

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "mode": self.mode.value,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def validate(
    text: str | bytes,
    mode: SyntaxMode | str = SyntaxMode.INTERNAL_STRICT,
    renderer: RendererConfig | None = None,
) -> SyntaxReport:
    mode = SyntaxMode(mode)
    if mode is not SyntaxMode.EXTERNAL_RENDERER:
        pmode = ParseMode.STRICT if mode is SyntaxMode.INTERNAL_STRICT else ParseMode.LENIENT
        result = parse_with_diagnostics(text, pmode)
        return SyntaxReport(result.ok, result.diagnostics, mode)
    if renderer is None:
        raise RendererUnavailable("external_renderer mode needs a RendererConfig")
    decoded, diags = _decode(text)
    try:
        outcome = render_external(decoded, renderer)
    except RenderTimeout as exc:
        diags.append(ParseDiagnostic(Severity.ERROR, SourceSpan(1, 1, 0), "E_RENDER_TIMEOUT", str(exc)))
        return SyntaxReport(False, diags, mode)
    if outcome.success and outcome.image:
        return SyntaxReport(True, diags, mode)
    message = outcome.stderr.strip().splitlines()[0][:200] if outcome.stderr.strip() else (
        f"renderer exited with status {outcome.returncode}"
    )
    diags.append(ParseDiagnostic(Severity.ERROR, SourceSpan(1, 1, 0), "E_RENDERER", message))
    return SyntaxReport(False, diags, mode)
