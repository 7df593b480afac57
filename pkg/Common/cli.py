"""
Command-line dispatch for manage.py
Accepts hyphenated aliases of the pipeline commands and rejects unknown
subcommands with a usage message (exit status 2)
"""

import sys
import django
from django.core.management import execute_from_command_line, get_commands

PIPELINE_COMMANDS = [
    "align",
    "filter",
    "make_noise",
    "train",
    "translate",
    "evaluate",
    "report",
    "make_toy_data",
    "experiment",
]

ALIASES = {name.replace("_", "-"): name for name in PIPELINE_COMMANDS}

USAGE = (
    "usage: manage.py <command> [--config FILE] [--seed N] [options]\n"
    "pipeline commands: " + ", ".join(sorted(ALIASES)) + "\n"
    "run 'manage.py help <command>' for the options of a command\n"
)


def main(argv=None):
    """
    Run a management command

    Returns:
        int: exit status (0 on success; errors exit through SystemExit)
    """
    argv = list(sys.argv if argv is None else argv)
    django.setup()

    if len(argv) > 1 and not argv[1].startswith("-"):
        argv[1] = ALIASES.get(argv[1], argv[1])
        if argv[1] not in get_commands() and argv[1] not in ("help", "version"):
            sys.stderr.write(f"Unknown command: {argv[1]!r}\n{USAGE}")
            return 2

    execute_from_command_line(argv)
    return 0
