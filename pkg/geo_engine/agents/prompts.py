"""Prompt templates and the request builders for every pipeline stage.

Template bodies live in ``templates/*.txt`` and use ``{name}`` placeholders.
The predicate-generation and solve templates are verbatim transcriptions; the
single-agent template is derived from the solve template by dropping its
``Predicates:`` line.
"""

from __future__ import annotations

import functools
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from ..dsl import PredicateProgram, serialize, strip_question_predicates
from ..errors import EmptyProgram, MissingImage, MissingPlaceholder
from ..models import Problem, TaskKind
from ..providers import ChatRequest, ImagePart, TextPart

LOGGER = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).with_name("templates")

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")
_PREDICATES_LINE = re.compile(r"^Predicates: \{predicates\}\n", re.MULTILINE)


class TemplateId(str, Enum):
    PREDICATE_GENERATION = "predicate_generation"
    SOLVE_MULTIPLE_CHOICE = "solve_multiple_choice"
    SOLVE_FREE_FORM = "solve_free_form"
    SINGLE_AGENT = "single_agent"
    JUDGE_FREE_FORM = "judge_free_form"
    DESCRIBE_DIAGRAM = "describe_diagram"
    DESCRIBE_PREDICATES = "describe_predicates"


@dataclass(slots=True, frozen=True)
class PromptTemplate:
    id: str
    body: str

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(_PLACEHOLDER.findall(self.body)))

    def render(self, **values: str) -> str:
        missing = [name for name in self.placeholders if values.get(name) is None]
        if missing:
            raise MissingPlaceholder(f"template '{self.id}' needs {', '.join(missing)}")
        return _PLACEHOLDER.sub(lambda match: str(values.get(match.group(1), match.group(0))), self.body)


@functools.lru_cache(maxsize=None)
def load_template(name: str) -> PromptTemplate:
    path = TEMPLATES_DIR / f"{name}.txt"
    return PromptTemplate(id=name, body=path.read_text(encoding="utf-8"))


@functools.lru_cache(maxsize=None)
def single_agent_template(kind: TaskKind) -> PromptTemplate:
    source = solve_template(kind)
    return PromptTemplate(id=TemplateId.SINGLE_AGENT.value, body=_PREDICATES_LINE.sub("", source.body, count=1))


def solve_template(kind: TaskKind) -> PromptTemplate:
    if kind is TaskKind.MULTIPLE_CHOICE:
        return load_template(TemplateId.SOLVE_MULTIPLE_CHOICE.value)
    return load_template(TemplateId.SOLVE_FREE_FORM.value)


def format_choices(problem: Problem) -> str:
    return "\n".join(f"{letter}. {choice}" for letter, choice in zip(problem.letters, problem.choices))


def _question_values(problem: Problem) -> dict[str, str]:
    values = {"question": problem.question}
    if problem.is_multiple_choice:
        values["choices"] = format_choices(problem)
    return values


def _image_part(problem: Problem) -> ImagePart:
    path = problem.image_path
    if path is None:
        raise MissingImage(f"problem {problem.id} has no image")
    if not path.is_file():
        raise MissingImage(f"problem {problem.id}: image {path} not found")
    return ImagePart(str(path))


# ------------------------------------------------------------------ builders
def build_interpreter_prompt(problem: Problem) -> ChatRequest:
    image = _image_part(problem)
    text = load_template(TemplateId.PREDICATE_GENERATION.value).render(question=problem.question)
    return ChatRequest(parts=(TextPart(text), image))


def build_solver_prompt(program: PredicateProgram, problem: Problem) -> ChatRequest:
    """Text-only request: the serialized program plus the question, nothing else."""

    program = strip_question_predicates(program)
    if not program:
        raise EmptyProgram(f"problem {problem.id}: no predicates to solve from")
    text = solve_template(problem.kind).render(predicates=serialize(program), **_question_values(problem))
    LOGGER.debug("Solver prompt for %s: %d predicates, %d chars", problem.id, len(program), len(text))
    return ChatRequest(parts=(TextPart(text),))


def build_single_agent_prompt(problem: Problem) -> ChatRequest:
    image = _image_part(problem)
    text = single_agent_template(problem.kind).render(**_question_values(problem))
    return ChatRequest(parts=(TextPart(text), image))


def build_judge_prompt(candidate: str, reference: str, tolerance: float) -> ChatRequest:
    text = load_template(TemplateId.JUDGE_FREE_FORM.value).render(
        candidate=candidate, reference=reference, tolerance=f"{tolerance:g}"
    )
    return ChatRequest(parts=(TextPart(text),))


def build_describe_diagram_prompt(problem: Problem) -> ChatRequest:
    image = _image_part(problem)
    text = load_template(TemplateId.DESCRIBE_DIAGRAM.value).render(question=problem.question)
    return ChatRequest(parts=(TextPart(text), image))


def build_describe_predicates_prompt(program: PredicateProgram) -> ChatRequest:
    if not program:
        raise EmptyProgram("cannot describe an empty predicate program")
    text = load_template(TemplateId.DESCRIBE_PREDICATES.value).render(predicates=serialize(program))
    return ChatRequest(parts=(TextPart(text),))
