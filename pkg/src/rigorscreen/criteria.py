"""Rigor criteria shared across detectors, adapters, curation and reports."""

REGISTRATION = "registration"
INCLUSION_EXCLUSION = "inclusion_exclusion"
BLINDING = "blinding"
RANDOMIZATION = "randomization"
POWER = "power"
SOFTWARE = "software"
OPEN_CODE = "open_code"
CELL_LINES = "cell_lines"
BASELINE_TABLE = "baseline_table"

CRITERIA = (
    REGISTRATION,
    INCLUSION_EXCLUSION,
    BLINDING,
    RANDOMIZATION,
    POWER,
    SOFTWARE,
    OPEN_CODE,
    CELL_LINES,
    BASELINE_TABLE,
)

# Shown to curators as the label contract for each criterion.
DESCRIPTIONS = {
    REGISTRATION: (
        "The paper reports a trial or protocol registration identifier "
        "issued by a recognized registry."
    ),
    INCLUSION_EXCLUSION: (
        "The paper states inclusion or exclusion criteria for subjects or "
        "participants (text statement or flow diagram). Exclusion of "
        "experimental variables that are not subjects does not count."
    ),
    BLINDING: (
        "Any form of blinding (conduct, assessment, or scoring) is reported."
    ),
    RANDOMIZATION: (
        "Randomization was used to split a study cohort into groups. "
        "Randomness used for other purposes (imputation, cross-validation) "
        "does not count."
    ),
    POWER: (
        "An a priori power or sample size calculation is reported. Post hoc "
        "power calculations and statements that no calculation was done do "
        "not count."
    ),
    SOFTWARE: "The paper mentions a software tool used in the work.",
    OPEN_CODE: (
        "Code written at least in part by the authors is stated to be "
        "available at an open, resolvable location. Availability on request "
        "and mere reuse of third-party code do not count."
    ),
    CELL_LINES: "A known problematic (misidentified/contaminated) cell line is used.",
    BASELINE_TABLE: "The paper includes a baseline characteristics table.",
}


def validate_criterion(criterion: str) -> str:
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion: {criterion!r}")
    return criterion
