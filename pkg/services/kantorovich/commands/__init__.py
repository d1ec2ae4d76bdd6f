# services/kantorovich/commands/__init__.py
"""
One module per subcommand. Each exposes NAME, HELP, DEFAULTS (string values,
lowest precedence), add_arguments(parser) and run(config, catalog), which
returns a Report or, for plot-script, the text to print.
"""
from commands import bounds, bv, converge, evaluate, moments, plot_script, selftest, stat, voronovskaja

COMMANDS = {
    module.NAME: module
    for module in (evaluate, moments, converge, voronovskaja, bounds, stat, bv, selftest, plot_script)
}
