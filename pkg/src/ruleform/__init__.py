"""ruleform: compile clinical decision rules into adaptive questionnaires.

Parses rulebases written in a small DSL into a formal rule model, translates
every rule into display rules that decide which questions a form must show,
searches for the question priority order that minimizes the initial form, and
runs interactive questionnaire sessions whose visible items evolve as the user
answers, locally or over HTTP.
"""

__version__ = "0.1.0"

from .catalog import (  # noqa: F401
    Catalog,
    CatalogError,
    Category,
    Code,
    Condition,
    DEFAULT_CATEGORIES,
    Kind,
    collapse_by_hierarchy,
    load_catalog,
    most_general_code,
    serialize_catalog,
)
from .display import (  # noqa: F401
    DisplayRule,
    DisplayRuleSet,
    Order,
    Variant,
    compile_display_rules,
    displayed_conditions,
    expected_rule_count,
    explain_display,
)
from .dsl import ParseError, parse_rulebase, print_rulebase  # noqa: F401
from .engine import (  # noqa: F401
    QuestionnaireDiff,
    QuestionnaireView,
    Recommendation,
    Session,
    create_session,
    restore_session,
    simulate_truthful,
)
from .errors import RuleformError  # noqa: F401
from .ordering import (  # noqa: F401
    GtspInstance,
    GtspTour,
    OptimizerConfig,
    OrderingInstance,
    brute_force_order,
    condition_frequency_order,
    gtsp_brute_solve,
    gtsp_reduce,
    objective,
    optimize_order,
    order_from_tour,
)
from .rules import (  # noqa: F401
    Action,
    AnyOf,
    ClinicalRule,
    PatientState,
    Premise,
    RuleBase,
    Verb,
    rule_triggers,
    validate_rulebase,
)
