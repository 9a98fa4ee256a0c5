"""Operator CLI: serve, init, import (roster/scores), export analytics and
seed-demo. Exit codes: 0 ok, 2 validation problem, 3 I/O problem.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import errors
from .analytics import Scope
from .models import Role
from .seed import seed_demo
from .service import Service
from .settings import Settings, load_settings_file
from .store import open_store

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


def _fail(exc: errors.GradelensError) -> None:
    click.echo(f"error [{exc.code}]: {exc.message}", err=True)
    if isinstance(exc, (errors.IoFailure, errors.CorruptJournal,
                        errors.IncompatibleSchemaVersion)):
        sys.exit(EXIT_IO)
    sys.exit(EXIT_VALIDATION)


@click.group()
def main() -> None:
    """Gradebook and student-outcomes analytics service."""


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--admin-name", default=None,
              help="Bootstrap a DepartmentHead account with this display name.")
@click.option("--admin-password", default=None)
def init(data_dir: str, admin_name: str | None, admin_password: str | None) -> None:
    """Create (or open) a store directory with default settings."""
    try:
        store = open_store(data_dir,
                           initial_settings=Settings().with_data_dir(data_dir))
        if admin_name:
            if not admin_password:
                raise errors.ValidationError("--admin-password required with --admin-name")
            service = Service(store)
            account = service.create_user(None, admin_name,
                                          Role.DEPARTMENT_HEAD, admin_password)
            click.echo(f"created department head {account.user_id}")
        store.close()
    except errors.GradelensError as exc:
        _fail(exc)
    click.echo(f"store ready at {data_dir}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def serve(config_path: str) -> None:
    """Run the HTTP API using a JSON settings document."""
    import uvicorn

    from .api import create_app

    try:
        settings = load_settings_file(config_path)
        store = open_store(settings.data_dir, initial_settings=settings)
    except errors.GradelensError as exc:
        _fail(exc)
        return
    service = Service(store)
    app = create_app(service)
    host, _, port = settings.listen_address.rpartition(":")
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    except OSError as exc:
        click.echo(f"error [io_failure]: cannot listen on "
                   f"{settings.listen_address}: {exc}", err=True)
        sys.exit(EXIT_IO)
    finally:
        store.close()


@main.group(name="import")
def import_group() -> None:
    """CSV ingestion."""


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error [io_failure]: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)


def _report_import(result) -> None:
    click.echo(f"applied {result.applied} rows, rejected {len(result.rejected)}")
    for row in result.rejected:
        click.echo(f"  line {row.line}: {row.reason}")


@import_group.command(name="roster")
@click.option("--class", "class_id", required=True)
@click.option("--file", "file_path", required=True, type=click.Path())
@click.option("--data-dir", default="./data", type=click.Path())
def import_roster(class_id: str, file_path: str, data_dir: str) -> None:
    """Enroll students from a roster CSV (creates missing accounts)."""
    text = _read_file(file_path)
    try:
        with open_store(data_dir) as store:
            result = Service(store).import_roster_csv(None, class_id, text)
    except errors.GradelensError as exc:
        _fail(exc)
        return
    _report_import(result)


@import_group.command(name="scores")
@click.option("--class", "class_id", required=True)
@click.option("--file", "file_path", required=True, type=click.Path())
@click.option("--data-dir", default="./data", type=click.Path())
def import_scores(class_id: str, file_path: str, data_dir: str) -> None:
    """Record raw scores from a scores CSV."""
    text = _read_file(file_path)
    try:
        with open_store(data_dir) as store:
            result = Service(store).import_scores_csv(None, class_id, text)
    except errors.GradelensError as exc:
        _fail(exc)
        return
    _report_import(result)


@main.group(name="export")
def export_group() -> None:
    """Report exports."""


@export_group.command(name="analytics")
@click.option("--scope", "scope_expr", required=True,
              help="e.g. class=cls-0001 | term=2024-1 | curriculum=2023;terms=2024-1,2024-2")
@click.option("--format", "fmt", required=True, type=click.Choice(["csv", "json"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--outcome", default=None)
@click.option("--data-dir", default="./data", type=click.Path())
def export_analytics(scope_expr: str, fmt: str, out_path: str,
                     outcome: str | None, data_dir: str) -> None:
    """Export attainment records for a scope."""
    from .reports import export_report

    try:
        scope = Scope.parse(scope_expr)
        with open_store(data_dir) as store:
            report = Service(store).analytics_export(None, scope, outcome)
            count = export_report(report, fmt, out_path)
    except errors.GradelensError as exc:
        _fail(exc)
        return
    click.echo(f"wrote {count} bytes to {out_path}")


@main.command(name="seed-demo")
@click.option("--data-dir", default="./data", type=click.Path())
def seed_demo_command(data_dir: str) -> None:
    """Populate a store with the deterministic demo dataset."""
    try:
        with open_store(data_dir,
                        initial_settings=Settings().with_data_dir(data_dir)) as store:
            ids = seed_demo(store)
    except errors.GradelensError as exc:
        _fail(exc)
        return
    click.echo(f"seeded demo data in {data_dir}")
    click.echo(f"  department head: {ids['head']}")
    click.echo(f"  instructors:     {', '.join(ids['instructors'])}")
    click.echo(f"  classes:         {', '.join(ids['classes'])}")
    click.echo(f"  students:        {len(ids['students'])}")


if __name__ == "__main__":
    main()
