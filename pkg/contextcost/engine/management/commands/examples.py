from engine.cli import EXAMPLES, EngineCommand, cmd_examples


class Command(EngineCommand):
    help = f"Write a canonical model file ({', '.join(EXAMPLES)})."

    def add_arguments(self, parser):
        parser.add_argument("name", help=" | ".join(EXAMPLES))
        parser.add_argument("output", help="path of the file to write")
        super().add_arguments(parser)

    def run(self, config, **options):
        return cmd_examples(options["name"], options["output"], config)
