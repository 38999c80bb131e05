"""Versioned prompt templates.

Every template carries a version string. The judge cache key and the
generation record both include it, so editing a template invalidates cached
responses and labels results with the prompt that produced them.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PromptTemplate:
    version: str
    system: str
    user: str

    def render(self, **fields: str) -> tuple[str, str]:
        return self.system.format(**fields), self.user.format(**fields)


JUDGE_SYSTEM = """\
[Role]
Expert Software Architect & Impartial Evaluator.

[Inputs]
<PRD_OR_GROUND_TRUTH>, <PREDICTED_DIAGRAM> (Code)

[Evaluation Rubric] (Constraint: Strictly adhere to Exemption Rules)
- Dim 1: Completeness (1-5): Evaluate strictly against the PRD for missing components. (Exemption: Do NOT penalize hallucinations here).
- Dim 2: Accuracy (1-5): Evaluate against the PRD for fabricated elements. (Exemption: Do NOT penalize omitted components here).
- Dim 3: Rationality (1-5): Evaluate topology against software engineering common sense. (Exemption: Ignore PRD omissions here).
- Dim 4: Readability (1-5): Evaluate code hierarchy/modularity based purely on code syntax. (Exemption: Do NOT evaluate functional correctness).

[Output Format]
STRICT JSON output required containing the rationale and Scores:
{{
    "rationale": "...",
    "scores": {{
        "completeness": <1-5>,
        "accuracy": <1-5>,
        "rationality": <1-5>,
        "readability": <1-5>
    }}
}}
"""

JUDGE_USER = """\
<PRD_OR_GROUND_TRUTH>
{reference}
</PRD_OR_GROUND_TRUTH>

<PREDICTED_DIAGRAM>
{predicted}
</PREDICTED_DIAGRAM>
"""

JUDGE_PROMPT = PromptTemplate("judge-v1", JUDGE_SYSTEM, JUDGE_USER)


ALIGN_SYSTEM = """\
You compare component names from two software architecture diagrams.
For every numbered pair decide how the predicted name relates to the reference name:
- "identical": the same component, possibly spelled differently
- "synonym": different words for the same component
- "generalization": one names a concrete instance of the other (for example MySQL and Database)
- "unrelated": different components
Use the containment context only to disambiguate.
Answer with JSON only: {{"verdicts": [{{"id": <pair number>, "relation": "<label>"}}, ...]}}
"""

ALIGN_USER = """\
Pairs:
{pairs}
"""

ALIGN_PROMPT = PromptTemplate("align-v1", ALIGN_SYSTEM, ALIGN_USER)


GEN_SYSTEM = """\
You are a software architect. Read the product requirements document and
produce a software architecture diagram as a PlantUML component diagram.

Requirements for your answer:
- Output exactly one diagram enclosed in @startuml and @enduml.
- Group components into layered packages (for example Application Layer,
  Support Layer, Infrastructure Layer).
- Declare every component, database, queue and external service the system needs.
- Draw directed dependencies between components with arrows.
"""

GEN_USER = "{prd}"

GEN_PROMPT = PromptTemplate("gen-v1", GEN_SYSTEM, GEN_USER)

JUDGE_PROMPT_VERSION = JUDGE_PROMPT.version
ALIGN_PROMPT_VERSION = ALIGN_PROMPT.version
GEN_PROMPT_VERSION = GEN_PROMPT.version

JUDGE_CORRECTION = (
    "Your previous answer could not be parsed: {error}. "
    "Reply again with the strict JSON object only, with integer scores from 1 to 5."
)
