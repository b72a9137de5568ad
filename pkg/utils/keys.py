# Centralized file-name builders
# Cache and report names are derived here only, so readers and writers agree


def spectrum_file(problem_digest: str) -> str:
    return f"spectrum_{problem_digest}.txt"


def nodes_file(problem_digest: str) -> str:
    return f"nodes_{problem_digest}.txt"


def table_file(study: str, table: str) -> str:
    return f"{study}_{table}.csv"


def report_file(study: str) -> str:
    return f"{study}_report.json"


def summary_file(study: str) -> str:
    return f"{study}_summary.txt"


def timings_file(study: str) -> str:
    return f"{study}_timings.json"
