from engine.cli import EngineCommand, cmd_verify


class Command(EngineCommand):
    help = "Check that a channel mediates an ontological model and verify H(M) >= I(C;O|lambda)."

    def add_arguments(self, parser):
        parser.add_argument("model", help="ontological-model JSON file")
        parser.add_argument("channel", help="channel JSON file")
        super().add_arguments(parser)

    def run(self, config, **options):
        return cmd_verify(options["model"], options["channel"], config)
