"""Prompt construction, pipeline execution and artifact extraction."""

from .extraction import NO_ANSWER_FOUND, NO_PREDICATES_FOUND, extract_answer, extract_predicate_block
from .pipeline import DEFAULT_TEMPERATURES, INTERPRETER_FAILED, AgentPipeline
from .prompts import (
    TEMPLATES_DIR,
    PromptTemplate,
    TemplateId,
    build_describe_diagram_prompt,
    build_describe_predicates_prompt,
    build_interpreter_prompt,
    build_judge_prompt,
    build_single_agent_prompt,
    build_solver_prompt,
    format_choices,
    load_template,
    single_agent_template,
    solve_template,
)

__all__ = [
    "AgentPipeline",
    "DEFAULT_TEMPERATURES",
    "INTERPRETER_FAILED",
    "NO_ANSWER_FOUND",
    "NO_PREDICATES_FOUND",
    "PromptTemplate",
    "TEMPLATES_DIR",
    "TemplateId",
    "build_describe_diagram_prompt",
    "build_describe_predicates_prompt",
    "build_interpreter_prompt",
    "build_judge_prompt",
    "build_single_agent_prompt",
    "build_solver_prompt",
    "extract_answer",
    "extract_predicate_block",
    "format_choices",
    "load_template",
    "single_agent_template",
    "solve_template",
]
