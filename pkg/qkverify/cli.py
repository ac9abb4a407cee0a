'''
The qkverify command line: `qkverify run` runs the verification suites and writes a report,
`qkverify list-checks` lists the registered checks.  Exit code 0 means every check passed, 1 that
at least one failed, 2 a usage error.
'''

# BSD 3-Clause License
# Copyright (c) 2023, engageLively
# All rights reserved.
# Redistribution and use in source and binary forms, with or without
# modification, are permitted provided that the following conditions are met:
# 1. Redistributions of source code must retain the above copyright notice, this
#    list of conditions and the following disclaimer.
# 2. Redistributions in binary form must reproduce the above copyright notice,
#    this list of conditions and the following disclaimer in the documentation
#    and/or other materials provided with the distribution.
# 3. Neither the name of the copyright holder nor the names of its
#    contributors may be used to endorse or promote products derived from
#    this software without specific prior written permission.
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS"
# AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE
# IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE
# DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS BE LIABLE
# FOR ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL
# DAMAGES (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR
# SERVICES; LOSS OF USE, DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER
# CAUSED AND ON ANY THEORY OF LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY,
# OR TORT (INCLUDING NEGLIGENCE OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE
# OF THIS SOFTWARE, EVEN IF ADVISED OF THE POSSIBILITY OF SUCH DAMAGE.

import logging
import sys

import click

from qkverify.check_registry import CheckNotFoundException
from qkverify.checks import check_registry
from qkverify.report import emit_report
from qkverify.suite_config import REPORT_FORMATS, SUITES, InvalidConfigException
from qkverify.suite_config import parse_tolerance, resolve_suite_config
from qkverify.suite_runner import run_suite

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def _usage_error(error):
    message = str(error)
    logging.error(message)
    raise click.UsageError(message)


@click.group()
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False), default='WARNING',
              show_default=True, help='Logging level; log lines go to stderr')
def main(log_level):
    '''Verify conformal-Killing 2-forms on ℍPⁿ and the Obata equation on its twistor space.'''
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, log_level.upper()),
                        format='%(asctime)s %(levelname)s %(message)s')


@main.command()
@click.option('--config', 'config_file', type=click.Path(dir_okay=False), default=None,
              help='JSON suite configuration')
@click.option('--n', type=int, default=None, help='Quaternionic dimension (>= 2)')
@click.option('--samples', type=int, default=None, help='Samples per check')
@click.option('--seed', type=int, default=None, help='Root seed (falls back to QKVERIFY_SEED)')
@click.option('--fd-step', type=float, default=None, help='Finite-difference step')
@click.option('--richardson/--no-richardson', default=None, help='Richardson refinement of second derivatives')
@click.option('--suite', 'suites', type=click.Choice(SUITES), multiple=True, help='Suite to run (repeatable)')
@click.option('--format', 'report_format', type=click.Choice(REPORT_FORMATS), default='json', show_default=True)
@click.option('--out', type=click.Path(dir_okay=False, writable=True), default=None,
              help='Report file (stdout if omitted)')
@click.option('--tolerance', 'tolerances', multiple=True, metavar='NAME=VALUE',
              help='Tolerance override for one check (repeatable)')
@click.option('--progress', is_flag=True, default=False, help='Show a progress bar on stderr')
def run(config_file, n, samples, seed, fd_step, richardson, suites, report_format, out, tolerances, progress):
    '''Run the selected suites and write the report.'''
    try:
        overrides = dict(parse_tolerance(text) for text in tolerances)
        config = resolve_suite_config(config_file, n=n, samples=samples, seed=seed, fd_step=fd_step,
                                      richardson=richardson, suites=list(suites) if suites else None,
                                      tolerances=overrides if overrides else None)
        results = run_suite(config, check_registry, progress)
    except (InvalidConfigException, CheckNotFoundException) as error:
        _usage_error(error)
    report = emit_report(results, config, report_format)
    if out is None:
        click.echo(report, nl=False)
    else:
        with open(out, 'w') as file:
            file.write(report)
        logging.info(f'Wrote the report to {out}')
    failures = [result.name for result in results if not result.passed]
    if failures:
        logging.warning(f'{len(failures)} checks failed: {", ".join(failures)}')
        sys.exit(1)


@main.command(name='list-checks')
@click.option('--suite', 'suites', type=click.Choice(SUITES), multiple=True, help='Only list these suites')
def list_checks(suites):
    '''List the registered checks: suite, name, default tolerance and reference.'''
    for suite in suites or SUITES:
        for check in check_registry.get_suite(suite):
            click.echo(f'{check.suite}\t{check.name}\t{check.tolerance:.0e}\t{check.reference}')


if __name__ == '__main__':
    main()
