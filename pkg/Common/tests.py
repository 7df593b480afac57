import math
import os
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError as SerializerValidationError

from Noise.serializers import NoiseConfigSerializer
from Text.corpus import write_lines
from .cli import ALIASES, main
from .config import ConfigFile, build_from_config, merge_overrides
from .seeding import derived_rng
from .validators import (
    validate_fraction,
    validate_non_negative,
    validate_nonempty,
    validate_probability,
    validate_same_length,
)


class ValidatorTests(SimpleTestCase):
    def test_probability_bounds(self):
        for value in (0.0, 0.5, 1.0):
            validate_probability(value)
        for value in (-0.1, 1.1, math.nan, math.inf):
            with self.assertRaises(ValidationError):
                validate_probability(value)

    def test_fraction_excludes_one(self):
        validate_fraction(0.0)
        with self.assertRaises(ValidationError):
            validate_fraction(1.0)

    def test_non_negative(self):
        validate_non_negative(0.0)
        with self.assertRaises(ValidationError):
            validate_non_negative(-1e-9)

    def test_collections(self):
        validate_nonempty([1])
        with self.assertRaises(ValidationError):
            validate_nonempty([])
        with self.assertRaises(ValidationError):
            validate_same_length([1, 2], [1])


class ConfigFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.path = self.dir / "noise.conf"
        write_lines(self.path, ["# synthetic channel", "P_DELETE=0.1", "P_SUBSTITUTE=0.2", "SEED=5"])

    def test_values_for_serializer_fields(self):
        values = ConfigFile(self.path).values_for(["p_delete", "p_repeat", "seed"])
        self.assertEqual(values, {"p_delete": "0.1", "seed": "5"})

    def test_missing_file_is_rejected(self):
        with self.assertRaises(ValidationError):
            ConfigFile(self.dir / "absent.conf")

    def test_empty_config_has_no_keys(self):
        config = ConfigFile()
        self.assertNotIn("P_DELETE", config)
        self.assertEqual(config.get("P_DELETE", 0.3), 0.3)

    def test_environment_overrides_file(self):
        with mock.patch.dict(os.environ, {"P_DELETE": "0.4"}):
            self.assertEqual(ConfigFile(self.path).get("P_DELETE", cast=float), 0.4)

    def test_precedence_flags_over_file_over_defaults(self):
        noise = build_from_config(
            NoiseConfigSerializer,
            ConfigFile(self.path),
            defaults={"seed": 1, "p_repeat": 0.05},
            overrides={"p_substitute": 0.3, "p_insert": None},
        )
        self.assertEqual(
            (noise.p_delete, noise.p_repeat, noise.p_substitute, noise.p_insert, noise.seed),
            (0.1, 0.05, 0.3, 0.0, 5),
        )

    def test_invalid_values_raise_serializer_errors(self):
        with self.assertRaises(SerializerValidationError):
            build_from_config(NoiseConfigSerializer, ConfigFile(self.path), overrides={"p_delete": 2.0})

    def test_merge_overrides_skips_none(self):
        self.assertEqual(merge_overrides({"a": 1, "b": 2}, {"a": None, "b": 3}), {"a": 1, "b": 3})

    def test_echo_to_copies_file(self):
        target = ConfigFile(self.path).echo_to(self.dir, "copy.conf")
        self.assertEqual(target.read_text(), self.path.read_text())


class SeedingTests(SimpleTestCase):
    def test_derived_streams_are_independent_of_call_order(self):
        first = derived_rng(7, 3).integers(0, 1000, size=5)
        derived_rng(7, 4).integers(0, 1000, size=5)
        self.assertTrue(np.array_equal(first, derived_rng(7, 3).integers(0, 1000, size=5)))
        self.assertFalse(np.array_equal(first, derived_rng(7, 4).integers(0, 1000, size=5)))


class CommandLineTests(SimpleTestCase):
    def test_unknown_subcommand_exits_2(self):
        stderr = StringIO()
        with redirect_stderr(stderr):
            self.assertEqual(main(["manage.py", "bogus"]), 2)
        self.assertIn("usage:", stderr.getvalue())

    def test_unknown_flag_exits_2(self):
        with redirect_stderr(StringIO()), self.assertRaises(SystemExit) as raised:
            main(["manage.py", "evaluate", "--bogus"])
        self.assertEqual(raised.exception.code, 2)

    def test_hyphenated_aliases(self):
        self.assertEqual(ALIASES["make-noise"], "make_noise")
        self.assertEqual(ALIASES["make-toy-data"], "make_toy_data")
        with redirect_stdout(StringIO()) as stdout, self.assertRaises(SystemExit) as raised:
            main(["manage.py", "make-noise", "--help"])
        self.assertEqual(raised.exception.code, 0)
        self.assertIn("--pairs-output", stdout.getvalue())

    def test_pipeline_errors_become_command_errors(self):
        with self.assertRaises(CommandError):
            call_command("evaluate", hypotheses="/nonexistent/hyp", references="/nonexistent/ref")
        with self.assertRaises(CommandError):
            call_command(
                "evaluate",
                config="/nonexistent/eval.conf",
                hypotheses="/nonexistent/hyp",
                references="/nonexistent/ref",
            )
