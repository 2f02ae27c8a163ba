from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import unittest
from unittest import mock

from hdslib import cli, commands
from hdslib.commands import Completion
from hdslib.suites import SUITES

from .utils import WorkdirMixin

small_suite = """
trials = 4
state_sizes = 2, 3
alpha_start = 0.01
alpha_stop = 100
alpha_ratio = 2
"""


class TestCommands(WorkdirMixin, unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.out = self.workdir / "reports"
        self.suite_config = self.workdir / "suite.cfg"
        self.suite_config.write_text(small_suite)

    def build_command(self, command_cls: type[commands.HdsCommand] | str, *args: str) -> commands.HdsCommand:
        """Instantiate the HdsCommand class for the given command."""
        if isinstance(command_cls, str):
            for cls in commands.COMMANDS:
                if cls.command_name() == command_cls:
                    command_cls = cls
                    break
            else:
                raise KeyError(f"command {command_cls} not found")

        parser = argparse.ArgumentParser(description="hds test command")
        parser.add_argument("--version", action="version", version="%(prog)s 0.0")
        subparsers = parser.add_subparsers(help="hds subcommands", required=True, dest="command_name")
        command_cls.add_subparser(subparsers)
        parsed_args = parser.parse_args([command_cls.command_name()] + list(args))
        with mock.patch("hdslib.config.Config.load"), mock.patch("hdslib.cli.Command.setup_logging"):
            try:
                return command_cls(parsed_args)
            except SystemExit as e:
                self.fail(f"Command argument parsing exited with code {e.code}")

    def run_command(self, command_cls: type[commands.HdsCommand] | str, *args: str) -> tuple[int, str, str]:
        """Run a command returning its exit code, stdout and stderr."""
        cmd = self.build_command(command_cls, *args)
        stdout_buf, stderr_buf = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout_buf), contextlib.redirect_stderr(stderr_buf):
            exit_code = cmd.main()
        return exit_code, stdout_buf.getvalue(), stderr_buf.getvalue()

    def run_cli(self, *args: str) -> tuple[int, str, str]:
        stdout_buf, stderr_buf = io.StringIO(), io.StringIO()
        with (
            mock.patch("hdslib.config.Config.load"),
            mock.patch("hdslib.cli.Command.setup_logging"),
            contextlib.redirect_stdout(stdout_buf),
            contextlib.redirect_stderr(stderr_buf),
        ):
            exit_code = cli.run(list(args), version="0.0")
        return exit_code, stdout_buf.getvalue(), stderr_buf.getvalue()

    def test_registry(self) -> None:
        names = [c.command_name() for c in commands.COMMANDS]
        for name in SUITES:
            self.assertIn(name, names)
        self.assertIn("kernel", names)
        self.assertIn("completion", names)
        self.assertNotIn("suitecommand", names)

    def test_complete(self) -> None:
        subtests = [
            {"cmd": "commands", "res": [c.command_name() for c in commands.COMMANDS]},
            {"cmd": "suites", "res": list(SUITES)},
        ]
        with mock.patch("hdslib.cli.Command.setup_logging"), mock.patch("hdslib.config.Config.load"):
            for subtest in subtests:
                with self.subTest(config=subtest["cmd"]):
                    completion = Completion(mock.Mock(subcommand=subtest["cmd"]))
                    with mock.patch("sys.stdout", new_callable=io.StringIO) as mock_stdout:
                        self.assertEqual(completion.main(), 0)
                    self.assertEqual(mock_stdout.getvalue().split("\n")[:-1], subtest["res"])
            completion = Completion(mock.Mock(subcommand="bogus"))
            with self.assertRaises(cli.Fail):
                completion.main()

    def test_kernel(self) -> None:
        code, stdout, stderr = self.run_command("kernel", "--kappa", "0", "--x", "1", "--y", "1")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(float(stdout), math.e, places=12)

    def test_kernel_imaginary(self) -> None:
        code, stdout, stderr = self.run_command("kernel", "--kappa", "0", "--x", "1", "--y", "2", "--imaginary")
        self.assertEqual(code, 0)
        re, im = stdout.split()
        self.assertAlmostEqual(float(re), math.cos(2.0), places=12)
        self.assertAlmostEqual(float(im.rstrip("i")), math.sin(2.0), places=12)

    def test_kernel_slice(self) -> None:
        path = self.workdir / "slice.csv"
        code, stdout, stderr = self.run_command(
            "kernel", "--kappa", "0.5", "--x", "0", "--y", "1", "--slice", path.as_posix(), "--slice-points", "11"
        )
        self.assertEqual(code, 0)
        with path.open() as fd:
            rows = list(csv.reader(fd))
        self.assertEqual(rows[0], ["x", "y", "Re E", "Im E"])
        self.assertEqual(len(rows), 12)
        self.assertEqual(float(rows[6][0]), 0.0)
        self.assertAlmostEqual(float(rows[6][2]), 1.0)

    def test_kernel_invalid(self) -> None:
        cmd = self.build_command("kernel", "--kappa", "-1", "--x", "1", "--y", "1")
        with self.assertRaises(cli.Fail) as e:
            cmd.main()
        self.assertEqual(e.exception.exit_code, 2)

    def test_suite(self) -> None:
        code, stdout, stderr = self.run_command(
            "verify-scalar-hds", "--config", self.suite_config.as_posix(), "--seed", "3", "--out", self.out.as_posix()
        )
        self.assertEqual(code, 0)
        self.assertEqual(stderr, "")
        self.assertIn("worst", stdout)
        report = json.loads((self.out / "verify-scalar-hds-3.json").read_text())
        self.assertTrue(report["pass"])
        self.assertEqual(report["config"]["trials"], 4)
        self.assertEqual(report["config"]["seed"], 3)
        self.assertTrue((self.out / "verify-scalar-hds-3.csv").exists())

        # Replaying the report gives the same report
        replayed = self.workdir / "replayed"
        source = self.out / "verify-scalar-hds-3.json"
        code, _, _ = self.run_command("verify-scalar-hds", "--replay", source.as_posix(), "--out", replayed.as_posix())
        self.assertEqual(code, 0)
        self.assertEqual(
            (replayed / "verify-scalar-hds-3.json").read_text(), (self.out / "verify-scalar-hds-3.json").read_text()
        )

    def test_freeze(self) -> None:
        fixtures = self.workdir / "baselines.json"
        self.suite_config.write_text(
            "trials = 4\nsequence_lengths = 1, 2\nhalf_width = 8\npoints = 64\ngrid_trials = 1\n"
            f"radius_start = 0.25\nradius_ratio = 1.5\nfixtures = {fixtures}\n"
        )
        args = ("--config", self.suite_config.as_posix(), "--out", self.out.as_posix())
        self.run_command("verify-fs", *args, "--freeze")
        data = json.loads(fixtures.read_text())
        self.assertEqual(list(data["baselines"]), ["verify-fs:p=2:q=2:d=1"])
        with self.assertRaises(cli.Fail):
            self.run_command("verify-scalar-hds", *args, "--freeze")

    def test_hypothesis(self) -> None:
        code, stdout, stderr = self.run_cli(
            "verify-vector-hds", "--config", self.suite_config.as_posix(), "--p", "3", "--q", "2"
        )
        self.assertEqual(code, 2)
        self.assertIn("requires p <= q", stderr)
        self.assertEqual(stdout, "")

    def test_bad_config(self) -> None:
        self.suite_config.write_text("trials = 4\nbogus = 1\n")
        code, stdout, stderr = self.run_cli("verify-scalar-hds", "--config", self.suite_config.as_posix())
        self.assertEqual(code, 2)
        self.assertEqual(stderr.strip(), f"{self.suite_config}:2: bogus: unknown key")

    def test_bad_arguments(self) -> None:
        code, _, _ = self.run_cli("verify-scalar-hds", "--seed", "many")
        self.assertEqual(code, 2)
        code, _, _ = self.run_cli("no-such-command")
        self.assertEqual(code, 2)
