"""
Base class for the pipeline management commands
Adds --config and --seed, seeds the process and turns pipeline errors into
CommandError so every command exits nonzero on failure
"""

import logging
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from Common.config import ConfigFile
from Common.exceptions import PipelineAbort
from Common.seeding import seed_everything

logger = logging.getLogger(__name__)


class PipelineCommand(BaseCommand):
    """
    Subclasses implement add_pipeline_arguments() and run()
    """

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            type=str,
            default=None,
            help="Key-value configuration file (KEY=value per line)",
        )
        parser.add_argument(
            "--seed",
            type=int,
            default=None,
            help="Global seed (default: DEFAULT_SEED setting)",
        )
        self.add_pipeline_arguments(parser)

    def add_pipeline_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            self.config_file = ConfigFile(options.get("config"))
            options["seed"] = seed_everything(self.resolve_seed(options["seed"]))
            return self.run(**options)
        except ValidationError as e:
            raise CommandError("; ".join(e.messages))
        except serializers.ValidationError as e:
            raise CommandError(f"Invalid configuration: {e.detail}")
        except PipelineAbort as e:
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]} aborted: {e}")
            raise CommandError(str(e))
        except FileNotFoundError as e:
            raise CommandError(f"File not found: {e.filename}")

    def resolve_seed(self, flag):
        """--seed, then SEED from the config file, then DEFAULT_SEED"""
        if flag is not None:
            return flag
        try:
            return self.config_file.get("SEED", settings.DEFAULT_SEED, cast=int)
        except ValueError:
            raise ValidationError(f"SEED must be an integer, got {self.config_file.get('SEED')!r}")

    def run(self, **options):
        raise NotImplementedError("subclasses of PipelineCommand must provide run()")
