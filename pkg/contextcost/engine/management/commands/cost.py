from engine.cli import EngineCommand, cmd_cost


class Command(EngineCommand):
    help = "Compute I(C;O|lambda) and the cheapest deterministic auxiliary variable for an ontological model."

    def add_arguments(self, parser):
        parser.add_argument("path", help="ontological-model JSON file")
        super().add_arguments(parser)

    def run(self, config, **options):
        return cmd_cost(options["path"], config)
