import shutil

import click

from securetext.params import PARTY_NAMES
from securetext.pipeline.batch import REPORT_PHASES


L = str.ljust

R = str.rjust


def _terminal_width():
    return shutil.get_terminal_size().columns


def display_title(title_string):
    """ Echo title_string in the center of the terminal. """
    if title_string:
        click.echo(title_string.center(_terminal_width()))


def _table(header, rows, justify=R):
    """ Echo rows of strings in columns as wide as their widest cell. """
    widths = [max(len(str(cell)) for cell in column) for column in zip(header, *rows)]
    for row in [header] + rows:
        click.echo("  ".join(justify(str(cell), width) for cell, width in zip(row, widths)))


def display_phase(party, phase, seconds, rounds):
    click.echo("{} {} phase: {:.3f}s over {} rounds".format(PARTY_NAMES[party], phase, seconds, rounds))


def display_outcome(outcome):
    display_title("{} outcome".format(PARTY_NAMES[outcome.role]))
    if (outcome.label is not None):
        click.echo("class: {}".format(outcome.label))
    elif (outcome.share is not None):
        click.echo("class share: {}".format(outcome.share))
    else:
        click.echo("class: withheld")
    rows = [[phase,
             "{:.3f}".format(outcome.phases[phase]["seconds"]),
             outcome.phases[phase]["rounds"],
             outcome.phases[phase]["bytes"]] for phase in REPORT_PHASES]
    _table(["phase", "seconds", "rounds", "bytes"], rows)


def display_demand(profile, demand):
    display_title("Randomness demand")
    click.echo(repr(profile))
    rows = [[stage] + list(part.counts().values()) for stage, part in demand.stages.items()]
    rows.append(["total"] + list(demand.counts().values()))
    _table(["stage"] + list(demand.counts().keys()), rows)


def display_report(report):
    """ Batch timings as CSV, followed by a failure count if any. """
    click.echo(report.to_csv(), nl=False)
    if report.failures:
        click.echo("{} of {} jobs failed.".format(report.failures, report.jobs), err=True)


def display_collisions(groups):
    if not(groups):
        click.echo("No collisions.")
        return
    for token, words in groups.items():
        click.echo("{}: {}".format(R(str(token), 8), ", ".join(words)))


def display_bucket_simulation(n_elements, t, rows):
    """ rows: (capacity, estimated overflow probability) pairs. """
    display_title("{} elements in {} buckets".format(n_elements, 1 << t))
    _table(["capacity", "overflow"], [[capacity, "{:.5f}".format(p)] for capacity, p in rows])


def display_accuracy(report):
    rows = [["secure", "{:.1%}".format(report.secure_accuracy)],
            ["plaintext", "{:.1%}".format(report.plaintext_accuracy)],
            ["agreement", "{:.1%}".format(report.agreement)]]
    _table(["pipeline", "accuracy"], rows, justify=L)
    click.echo("{} messages, {} failed sessions.".format(report.total, report.failures))
