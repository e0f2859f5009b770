'''
===============================================================================
Trajectory Input and Output

CSV export with one row per sample and a netCDF4 archive that keeps the full
complex moments so a trajectory can be read back.
===============================================================================
'''
from pathlib import Path
import netCDF4 as nc
import numpy as np

from nrbattery.momentstate import Trajectory
from nrbattery.integrator import observables


MODE_LABELS = ('a', 'b', 'c')


def trajectory_columns(traj: Trajectory) -> dict[str, np.ndarray]:
    """trajectory_columns: columns t, re/im of each mode amplitude, n_aa,
    n_bb, re/im n_ab, e_a, e_b, eta, power.
    """
    columns = {'t': traj.times}
    for ii in range(traj.n_modes):
        columns[f're_{MODE_LABELS[ii]}'] = traj.first[:, ii].real
        columns[f'im_{MODE_LABELS[ii]}'] = traj.first[:, ii].imag

    columns['n_aa'] = traj.second[:, 0, 0].real
    columns['n_bb'] = traj.second[:, 1, 1].real
    columns['re_n_ab'] = traj.second[:, 0, 1].real
    columns['im_n_ab'] = traj.second[:, 0, 1].imag
    columns['e_a'] = traj.energy_a
    columns['e_b'] = traj.energy_b
    columns['eta'] = traj.efficiency
    columns['power'] = traj.power
    return columns


def write_trajectory_netcdf(traj: Trajectory, path: Path,
                            omega: tuple[float, float] = (1.0, 1.0)) -> Path:
    """write_trajectory_netcdf: stores times and the real and imaginary parts
    of the first and second moments.
    """
    with nc.Dataset(str(path), 'w', format='NETCDF4') as data:
        data.createDimension('time', traj.n_samples)
        data.createDimension('mode', traj.n_modes)
        data.createDimension('mode2', traj.n_modes)

        data.model = traj.model
        data.omega_a = omega[0]
        data.omega_b = omega[1]

        var = data.createVariable('time', 'f8', ('time',))
        var[:] = traj.times
        for part, func in (('re', np.real), ('im', np.imag)):
            var = data.createVariable(f'first_{part}', 'f8', ('time', 'mode'))
            var[:] = func(traj.first)
            var = data.createVariable(f'second_{part}', 'f8', ('time', 'mode', 'mode2'))
            var[:] = func(traj.second)

    return path


def read_trajectory_netcdf(path: Path) -> Trajectory:
    """read_trajectory_netcdf: reads a trajectory archive and recomputes the
    observables.

    Raises:
        FileNotFoundError: the archive does not exist.
    """
    if not path.is_file():
        raise FileNotFoundError(f'Trajectory archive not found at: {path}.')

    with nc.Dataset(str(path), 'r') as data:
        times = np.array(data.variables['time'][:])
        first = (np.array(data.variables['first_re'][:])
                 + 1j*np.array(data.variables['first_im'][:]))
        second = (np.array(data.variables['second_re'][:])
                  + 1j*np.array(data.variables['second_im'][:]))
        model = str(data.model)
        omega_a = float(data.omega_a)
        omega_b = float(data.omega_b)

    traj = Trajectory(times=times, first=first, second=second, model=model)
    return observables(traj, omega_a, omega_b)
