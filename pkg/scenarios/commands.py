# scenarios/commands.py - Scenario commands built on a common base
import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from fields import field_solver, micro_aggregation, wave_analysis
from fields.errors import UnsupportedMode
from fields.model_core import ModelParams, steady_A, steady_B
from synthetic_data import synth_events

from .artifact_writer import ArtifactWriter
from .config import ModeSection, ScenarioConfig

logger = logging.getLogger(__name__)


class ScenarioCommand:
    """Generic command: runs one scenario section and writes its artifacts"""

    name = ''

    def __init__(self, config: ScenarioConfig, writer: ArtifactWriter, threads: int = 1):
        self.config = config
        self.writer = writer
        self.threads = max(int(threads), 1)

    @property
    def params(self) -> ModelParams:
        return self.config.params

    @property
    def section(self):
        return self.config.section

    def run(self) -> Dict[str, Any]:
        """Execute the scenario; returns derived quantities for the manifest"""
        raise NotImplementedError

    def execute(self) -> Dict[str, Any]:
        logger.info(f"Running {self.name} scenario")
        derived = self.run()
        logger.info(f"Finished {self.name} scenario ({len(self.writer.get_written())} artifacts)")
        return derived


def build_mode_from_section(params: ModelParams, section: ModeSection) -> wave_analysis.WaveMode:
    try:
        kind = wave_analysis.WaveModeKind(section.kind)
    except ValueError:
        raise UnsupportedMode(f"unknown mode kind '{section.kind}'")
    omega = section.omega
    if omega is None:
        omega = wave_analysis.dispersion_solve(params, section.k, branch=section.branch)
        logger.info(f"Dispersion branch for k={section.k:g}: omega={omega:.12g}")
    return wave_analysis.build_mode(params, section.k, omega, kind, section.lambdas)


class SteadyCommand(ScenarioCommand):
    name = 'steady'

    def run(self) -> Dict[str, Any]:
        p = self.params
        axis = np.linspace(0.0, p.X, self.section.n_points)
        x, y = np.meshgrid(axis, axis, indexing='ij')
        frame = pd.DataFrame({
            'x': x.ravel(),
            'y': y.ravel(),
            'A': np.ravel(steady_A(p, x, y)),
            'B': np.ravel(steady_B(p, x, y)),
        })
        self.writer.write_frame('steady.csv', frame)
        return {'corner_A': steady_A(p, p.X, p.X), 'corner_B': steady_B(p, p.X, p.X), 'n_nodes': len(frame)}


class DispersionCommand(ScenarioCommand):
    name = 'dispersion'

    def run(self) -> Dict[str, Any]:
        s = self.section
        ks = np.linspace(s.k_min, s.k_max, s.n_k)
        rows = wave_analysis.dispersion_table(self.params, ks, omega_max=s.omega_max, branch=s.branch)
        frame = pd.DataFrame([vars(row) for row in rows], columns=['k', 'omega', 's1', 's2', 'discriminant', 'region'])
        self.writer.write_frame('dispersion.csv', frame)

        velocities = wave_analysis.group_velocity(rows)
        self.writer.write_frame('group_velocity.csv', pd.DataFrame(velocities, columns=['k', 'v_group']))
        return {
            'n_rows': len(rows),
            'regions': {str(k): int(v) for k, v in frame['region'].value_counts().sort_index().items()},
            'omega_range': [float(np.nanmin(frame['omega'])), float(np.nanmax(frame['omega']))]
            if frame['omega'].notna().any() else None,
        }


class ModeCommand(ScenarioCommand):
    name = 'mode'

    def run(self) -> Dict[str, Any]:
        p = self.params
        mode = build_mode_from_section(p, self.section)
        y = np.linspace(0.0, p.X, self.section.n_points)
        z = y - p.X
        frame = pd.DataFrame({
            'y': y,
            'f': mode.profile(z),
            'df': mode.profile(z, 1),
            'g': mode.companion_profile(z),
        })
        self.writer.write_frame('mode_profile.csv', frame)

        derived: Dict[str, Any] = {'mode': mode.to_dict()}
        if mode.kind is wave_analysis.WaveModeKind.SINGLE_DECAY:
            surface = wave_analysis.surface_profile(mode, p)
            credit = wave_analysis.border_credit_total(mode, p, 0.0)
            derived['surface_amplitude'] = surface.amplitude
            derived['border_credit_total_t0'] = credit.closed_form
        elif mode.kind is wave_analysis.WaveModeKind.GROWTH_PAIR:
            derived['growth_ratio_depth_1'] = float(wave_analysis.growth_profile(mode, [min(1.0, p.X)])[0])
        return derived


class SimulateCommand(ScenarioCommand):
    name = 'simulate'

    def _initial_state(self):
        p, s = self.params, self.section
        mode: Optional[wave_analysis.WaveMode] = None
        if s.seed_mode is not None:
            mode = build_mode_from_section(p, s.seed_mode)
        L_x = s.L_x if s.L_x is not None else (2.0 * math.pi / mode.k if mode is not None else p.X)
        state = field_solver.init_grid(p, s.n_x, s.n_y, L_x, s.sponge_cells, s.sponge_strength)
        if mode is not None:
            return field_solver.seed_analytic_mode(state, mode, s.seed_amplitude), mode
        pulse = s.seed_pulse
        return field_solver.seed_pulse(state, pulse.center, pulse.width, pulse.amplitude), None

    def _snapshot_rows(self, state) -> pd.DataFrame:
        a, b = field_solver.reconstruct_fields(state)
        xi, yi = np.meshgrid(np.arange(state.n_x + 1), np.arange(state.n_y + 1), indexing='ij')
        return pd.DataFrame({
            't': np.full(xi.size, state.t),
            'xi': xi.ravel(),
            'yi': yi.ravel(),
            'phi': state.phi.ravel(),
            'psi': state.psi.ravel(),
            'A': a.ravel(),
            'B': b.ravel(),
        })

    def _surface_rows(self, state) -> pd.DataFrame:
        trace = field_solver.surface_trace(state)
        return pd.DataFrame({'t': np.full(trace.size, state.t), 'xi': np.arange(trace.size), 'xi_elev': trace})

    def run(self) -> Dict[str, Any]:
        s = self.section
        state, mode = self._initial_state()
        dt_max = field_solver.cfl_max_dt(state)
        dt = s.dt_factor * dt_max
        track_surface = self.params.h_y != 0.0

        snapshots: List[pd.DataFrame] = []
        surfaces: List[pd.DataFrame] = []
        diagnostics: List[Dict[str, float]] = []

        def record(current):
            snapshots.append(self._snapshot_rows(current))
            if track_surface:
                surfaces.append(self._surface_rows(current))

        if s.snapshot_every > 0:
            record(state)
        for n in range(1, s.n_steps + 1):
            state = field_solver.step(state, dt)
            if len(state.history) == field_solver.HISTORY_DEPTH:
                d = field_solver.diagnostics(state)
                diagnostics.append({'t': d.t, 'res_A': d.residual_A, 'res_B': d.residual_B,
                                    'energy': d.quad_energy, 'max_amp': d.max_amplitude})
            if s.snapshot_every > 0 and n % s.snapshot_every == 0:
                record(state)
        if s.snapshot_every == 0:
            record(state)

        self.writer.write_frame('snapshots.csv', pd.concat(snapshots, ignore_index=True))
        if track_surface:
            self.writer.write_frame('surface_trace.csv', pd.concat(surfaces, ignore_index=True))
        self.writer.write_frame('diagnostics.csv',
                                pd.DataFrame(diagnostics, columns=['t', 'res_A', 'res_B', 'energy', 'max_amp']))

        spectrum = field_solver.bulk_growth_rates(self.params)
        derived: Dict[str, Any] = {
            'dt': dt,
            'dt_max': dt_max,
            'c_max': spectrum.c_max,
            'bulk_growth_per_wavenumber': list(spectrum.growth_per_wavenumber),
            'L_x': state.L_x,
            't_final': state.t,
            'boundaries': {
                'x': 'periodic',
                'y=X': 'surface (Robin ghost layer)',
                'y=0': 'clamped' + (f' + {s.sponge_cells}-row sponge' if s.sponge_cells else ''),
            },
        }
        if mode is not None:
            derived['mode'] = mode.to_dict()
        return derived


class AggregateCommand(ScenarioCommand):
    name = 'aggregate'

    def run(self) -> Dict[str, Any]:
        p, s = self.params, self.section
        if s.events_path is not None:
            events = micro_aggregation.read_events_csv(s.events_path)
            source = s.events_path
        else:
            events = synth_events(p, s.synth_M, self.config.rng_seed)
            source = f'synthetic (M={s.synth_M}, seed={self.config.rng_seed})'
        workers = self.threads if s.workers is None else max(min(s.workers, self.threads), 1)
        grid = micro_aggregation.aggregate_transactions(events, s.n_cells, p.X, workers=workers)

        self.writer.write_frame('grid.csv', grid.to_frame())
        self.writer.write_frame('marginals.csv', pd.DataFrame({
            'cell': np.arange(s.n_cells),
            'out': micro_aggregation.marginal_out(grid),
            'in': micro_aggregation.marginal_in(grid),
        }))
        return {
            'source': source,
            'n_events': len(events),
            'event_total': math.fsum(events.amount),
            'grid_total': grid.grand_total,
            'workers': workers,
        }


COMMAND_TYPES = {cls.name: cls for cls in (SteadyCommand, DispersionCommand, ModeCommand, SimulateCommand, AggregateCommand)}
