from engine.cli import EngineCommand, cmd_analyze


class Command(EngineCommand):
    help = "Validate an empirical-model file and decide whether a global joint distribution exists."

    def add_arguments(self, parser):
        parser.add_argument("path", help="empirical-model JSON file")
        super().add_arguments(parser)

    def run(self, config, **options):
        return cmd_analyze(options["path"], config)
