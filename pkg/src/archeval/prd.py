"""PRD section parsing and the three context-gradation input settings."""

from __future__ import annotations

import difflib
import enum
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .model import digest_text

FUZZY_CUTOFF = 0.85


class NoSectionsFound(ValueError):
    pass


class MissingRequiredSection(ValueError):
    pass


class SectionKind(str, enum.Enum):
    INTRODUCTION = "introduction"
    CORE_OBJECTIVES = "core_objectives"
    FUNCTIONAL_FEATURES = "functional_features"
    TECHNICAL_CONSTRAINTS = "technical_constraints"
    NON_FUNCTIONAL_REQUIREMENTS = "non_functional_requirements"
    SYSTEM_ARCHITECTURE_DESCRIPTION = "system_architecture_description"


CANONICAL_ORDER = tuple(SectionKind)

CANONICAL_TITLES = {
    SectionKind.INTRODUCTION: "System Introduction",
    SectionKind.CORE_OBJECTIVES: "Core Objectives",
    SectionKind.FUNCTIONAL_FEATURES: "Functional Features",
    SectionKind.TECHNICAL_CONSTRAINTS: "Technical Constraints",
    SectionKind.NON_FUNCTIONAL_REQUIREMENTS: "Non-functional Requirements",
    SectionKind.SYSTEM_ARCHITECTURE_DESCRIPTION: "System Architecture Description",
}


class ContextSetting(str, enum.Enum):
    FULL = "full"
    NO_ARCH = "no_arch"
    MIN = "min"

    @classmethod
    def parse(cls, value: str | ContextSetting) -> ContextSetting:
        if isinstance(value, ContextSetting):
            return value
        v = value.strip().lower().replace("-", "_")
        aliases = {"noarch": "no_arch", "_arch": "no_arch", "minimal": "min"}
        return cls(aliases.get(v, v))


SETTING_SECTIONS = {
    ContextSetting.FULL: CANONICAL_ORDER,
    ContextSetting.NO_ARCH: tuple(k for k in CANONICAL_ORDER if k is not SectionKind.SYSTEM_ARCHITECTURE_DESCRIPTION),
    ContextSetting.MIN: (SectionKind.CORE_OBJECTIVES, SectionKind.FUNCTIONAL_FEATURES),
}

DEFAULT_HEADING_SYNONYMS: dict[SectionKind, tuple[str, ...]] = {
    SectionKind.INTRODUCTION: (
        "system introduction", "introduction", "system overview", "overview", "project introduction",
        "project overview", "background", "系统介绍", "系统简介", "项目介绍", "项目简介", "简介", "引言",
        "概述", "系统概述", "项目概述", "项目背景",
    ),
    SectionKind.CORE_OBJECTIVES: (
        "core objectives", "objectives", "core goals", "goals", "project goals", "project objectives",
        "business objectives", "system objectives", "核心目标", "目标", "项目目标", "系统目标", "核心目的",
    ),
    SectionKind.FUNCTIONAL_FEATURES: (
        "functional features", "features", "functional requirements", "functions", "feature list",
        "core features", "功能特性", "功能需求", "功能", "功能特点", "核心功能", "功能列表", "功能描述",
    ),
    SectionKind.TECHNICAL_CONSTRAINTS: (
        "technical constraints", "constraints", "technology constraints", "technical requirements",
        "technology stack", "tech stack", "技术约束", "技术限制", "约束", "技术栈", "技术要求", "约束条件",
    ),
    SectionKind.NON_FUNCTIONAL_REQUIREMENTS: (
        "non functional requirements", "nonfunctional requirements", "non functional", "quality attributes",
        "quality requirements", "非功能需求", "非功能性需求", "非功能要求", "质量属性",
    ),
    SectionKind.SYSTEM_ARCHITECTURE_DESCRIPTION: (
        "system architecture description", "system architecture", "architecture", "architecture description",
        "architecture overview", "architecture design", "系统架构描述", "系统架构", "架构描述", "架构设计", "架构",
        "系统架构说明",
    ),
}

_HEADING_RE = re.compile(r"^ {0,3}(#{1,6})(?:[ \t]+|(?=[^\x00-\x7f]))(.*?)(?:[ \t]+#+)?[ \t]*$")
_FENCE_RE = re.compile(r"^ {0,3}(```|~~~)")
_NUMBERING_RE = re.compile(
    r"^\s*(?:"
    r"\d+(?:\.\d+)*[.)、:：]?\s+"
    r"|\d+(?:\.\d+)*[.)、:：]"
    r"|[ivxlcdm]+[.)]\s*"
    r"|[a-z][.)]\s+"
    r"|[一二三四五六七八九十]+[、.．:：]\s*"
    r"|[（(]\s*[\d一二三四五六七八九十]+\s*[)）]\s*"
    r"|第[一二三四五六七八九十\d]+[章节部分][、.．:：]?\s*"
    r")"
)


def normalize_heading(text: str) -> str:
    """
    >>> normalize_heading("1. Core Objectives")
    'core objectives'
    >>> normalize_heading("**三、功能需求：**")
    '功能需求'
    """
    text = unicodedata.normalize("NFKC", text).strip()
    text = re.sub(r"[*_`]+", "", text).strip()
    text = _NUMBERING_RE.sub("", text.lower(), count=1)
    text = re.sub(r"[\W_]+", " ", text)
    return text.strip()


@dataclass(frozen=True)
class HeadingMatcher:
    synonyms: Mapping[SectionKind, tuple[str, ...]] = field(default_factory=lambda: DEFAULT_HEADING_SYNONYMS)
    cutoff: float = FUZZY_CUTOFF

    def __post_init__(self) -> None:
        table = {}
        for kind, names in self.synonyms.items():
            for name in names:
                table.setdefault(normalize_heading(name), SectionKind(kind))
        object.__setattr__(self, "_table", table)

    @classmethod
    def with_overrides(cls, overrides: Mapping[str, list[str]], keep_defaults: bool = True) -> HeadingMatcher:
        merged = {k: tuple(v) for k, v in DEFAULT_HEADING_SYNONYMS.items()} if keep_defaults else {}
        for kind, names in overrides.items():
            k = SectionKind(kind)
            # overrides go first so they win exact-match lookups
            merged[k] = tuple(names) + merged.get(k, ())
        return cls(merged)

    @classmethod
    def load(cls, path: str | Path) -> HeadingMatcher:
        path = Path(path)
        raw = path.read_text(encoding="utf-8")
        if path.suffix == ".toml":
            from ._toml import loads

            data = loads(raw)
            data = data.get("prd_headings", data)
        else:
            data = json.loads(raw)
        return cls.with_overrides(data)

    def classify(self, heading: str) -> SectionKind | None:
        norm = normalize_heading(heading)
        if not norm:
            return None
        table: dict = self._table  # type: ignore[attr-defined]
        if norm in table:
            return table[norm]
        best: dict[SectionKind, float] = {}
        for name, kind in table.items():
            r = difflib.SequenceMatcher(None, norm, name).ratio()
            if r >= self.cutoff and r > best.get(kind, 0.0):
                best[kind] = r
        if not best:
            return None
        top = max(best.values())
        winners = [k for k, r in best.items() if r == top]
        return winners[0] if len(winners) == 1 else None


@dataclass(frozen=True)
class PrdDocument:
    sections: dict[SectionKind, str]
    source_digest: str
    extras: tuple[tuple[str, str], ...] = ()
    warnings: tuple[str, ...] = ()
    heading_titles: dict[SectionKind, str] = field(default_factory=dict)

    def __contains__(self, kind: SectionKind) -> bool:
        return kind in self.sections

    def kinds(self) -> list[SectionKind]:
        return list(self.sections)


def _strip_blank_edges(lines: list[str]) -> str:
    start, end = 0, len(lines)
    while start < end and not lines[start].strip():
        start += 1
    while end > start and not lines[end - 1].strip():
        end -= 1
    return "\n".join(lines[start:end])


def _headings(lines: list[str]) -> list[tuple[int, int, str]]:
    out = []
    fence = None
    for i, line in enumerate(lines):
        fm = _FENCE_RE.match(line)
        if fm:
            if fence is None:
                fence = fm.group(1)
            elif fm.group(1) == fence:
                fence = None
            continue
        if fence is not None:
            continue
        m = _HEADING_RE.match(line)
        if m and m.group(2).strip():
            out.append((i, len(m.group(1)), m.group(2).strip()))
    return out


def parse_prd(markdown: str, matcher: HeadingMatcher | None = None) -> PrdDocument:
    matcher = matcher or HeadingMatcher()
    if markdown.startswith("\ufeff"):
        markdown = markdown[1:]
    lines = markdown.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    heads = _headings(lines)
    if not heads:
        raise NoSectionsFound("document has no markdown headings")

    # the split level is the one carrying the most recognizable section titles
    mapped_by_level: dict[int, int] = {}
    for _, level, title in heads:
        if matcher.classify(title) is not None:
            mapped_by_level[level] = mapped_by_level.get(level, 0) + 1
    if mapped_by_level:
        split = max(mapped_by_level, key=lambda lv: (mapped_by_level[lv], -lv))
    else:
        split = min(level for _, level, _ in heads)

    bounds = [(i, level, title) for i, level, title in heads if level <= split]
    sections: dict[SectionKind, str] = {}
    titles: dict[SectionKind, str] = {}
    extras: list[tuple[str, str]] = []
    warnings: list[str] = []
    seen_split = False
    for n, (i, level, title) in enumerate(bounds):
        end = bounds[n + 1][0] if n + 1 < len(bounds) else len(lines)
        body = _strip_blank_edges(lines[i + 1 : end])
        if level < split and not seen_split:
            continue  # document title above the section level
        seen_split = True
        kind = matcher.classify(title) if level == split else None
        if kind is None:
            extras.append((title, body))
            warnings.append(f"unrecognized section heading {title!r}")
        elif kind in sections:
            extras.append((title, body))
            warnings.append(f"duplicate {kind.value} section {title!r}; kept the first")
        else:
            sections[kind] = body
            titles[kind] = title
    for kind in CANONICAL_ORDER:
        if kind not in sections:
            warnings.append(f"section {CANONICAL_TITLES[kind]!r} not found")
    return PrdDocument(sections, digest_text(markdown), tuple(extras), tuple(warnings), titles)


def apply_setting(doc: PrdDocument, setting: ContextSetting | str) -> str:
    """Re-emit the sections a setting keeps, in canonical order with canonical titles."""
    setting = ContextSetting.parse(setting)
    kinds = SETTING_SECTIONS[setting]
    if setting is ContextSetting.MIN:
        missing = [CANONICAL_TITLES[k] for k in kinds if k not in doc.sections]
        if missing:
            raise MissingRequiredSection(f"min setting needs: {', '.join(missing)}")
    chunks = []
    for kind in kinds:
        if kind in doc.sections:
            body = doc.sections[kind]
            chunks.append(f"# {CANONICAL_TITLES[kind]}\n\n{body}\n" if body else f"# {CANONICAL_TITLES[kind]}\n")
    return "\n".join(chunks)


def section_kinds(text: str, matcher: HeadingMatcher | None = None) -> list[SectionKind]:
    return parse_prd(text, matcher).kinds()
