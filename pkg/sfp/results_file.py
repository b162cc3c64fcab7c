#####################################################################
#                                                                   #
# /results_file.py                                                  #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
import os

import labscript_utils.h5_lock, h5py
import numpy as np
from labscript_utils import dedent


class ResultsFile(object):
    """A class for saving/retrieving recovery results to/from an hdf5 file.

    Scalars are stored as attributes and arrays as datasets, both under
    ``'/results/<group>'``.

    Args:
        h5_path (str): The path, including file name and extension, to the hdf5
            file. It is created if it does not exist.
        no_write (bool, optional): Set to `True` to open the file read-only.
            Doing so prohibits saving results. Defaults to `False`.
        group (str, optional): The default group for saved results.
    """
    def __init__(self, h5_path, no_write=False, group=None):
        self.__h5_path = os.fspath(h5_path)
        self.__no_write = no_write
        self.__group = None
        if not self.no_write:
            with h5py.File(self.h5_path, 'a') as h5_file:
                h5_file.require_group('results')
            if group is not None:
                self.set_group(group)
        else:
            self.__group = group

    @property
    def h5_path(self):
        """str: The value provided for `h5_path` during instantiation."""
        return self.__h5_path

    @property
    def no_write(self):
        """bool: The value provided for `no_write` during instantiation."""
        return self.__no_write

    @property
    def group(self):
        """str: The group in ``'/results'`` in which results are saved by
        default. Setting it calls :meth:`set_group`."""
        return self.__group

    @group.setter
    def group(self, value):
        self.set_group(value)

    def set_group(self, groupname):
        """Set the default group for saving results, creating it if needed.

        Args:
            groupname (str): Name of the group inside ``'/results'``.
        """
        if self.no_write:
            msg = "Cannot create group; this results file is read-only."
            raise PermissionError(msg)
        with h5py.File(self.h5_path, 'a') as h5_file:
            h5_file['results'].require_group(groupname)
        self.__group = groupname

    def _target_group(self, group):
        if group:
            return group
        if self.group is None:
            msg = """Cannot save result; no default group set. Either
                specify a value for this method's optional group
                argument, or set a default value using the set_group()
                method."""
            raise ValueError(dedent(msg))
        return 'results/' + self.group

    def save_result(self, name, value, group=None, overwrite=True):
        """Save a scalar or short value as an attribute.

        `None` values are skipped since hdf5 attributes cannot hold them.

        Raises:
            PermissionError: If the file is read-only, or the attribute exists
                and `overwrite` is `False`.
            ValueError: If no group is given and no default group is set.
        """
        if self.no_write:
            msg = "Cannot save result; this results file is read-only."
            raise PermissionError(msg)
        if value is None:
            return
        group = self._target_group(group)
        with h5py.File(self.h5_path, 'a') as h5_file:
            target = h5_file.require_group(group)
            if name in target.attrs and not overwrite:
                msg = """Cannot save result; group '{group}' already has
                    attribute '{name}' and overwrite is set to False. Set
                    overwrite=True to overwrite the existing value.""".format(
                        group=group,
                        name=name,
                    )
                raise PermissionError(dedent(msg))
            target.attrs[name] = value

    def save_results_dict(self, results_dict, **kwargs):
        """Call :meth:`save_result` for every item of a flat dict."""
        for name, value in results_dict.items():
            self.save_result(name, value, **kwargs)

    def save_result_array(self, name, data, group=None, overwrite=True,
                          **kwargs):
        """Save an array as a dataset.

        Additional keyword arguments are passed to `h5py.create_dataset()`.

        Raises:
            PermissionError: If the file is read-only, or the dataset exists
                and `overwrite` is `False`.
            ValueError: If no group is given and no default group is set.
        """
        if self.no_write:
            msg = "Cannot save result; this results file is read-only."
            raise PermissionError(msg)
        group = self._target_group(group)
        with h5py.File(self.h5_path, 'a') as h5_file:
            target = h5_file.require_group(group)
            if name in target:
                if not overwrite:
                    msg = """Cannot save result; group '{group}' already has
                        dataset '{name}' and overwrite is set to False. Set
                        overwrite=True to overwrite the existing
                        value.""".format(
                            group=group,
                            name=name,
                        )
                    raise PermissionError(dedent(msg))
                del target[name]
            target.create_dataset(name, data=data, **kwargs)

    def get_result(self, group, name):
        """Return attribute `name` of ``'/results/<group>'``."""
        with h5py.File(self.h5_path, 'r') as h5_file:
            if group not in h5_file['results']:
                raise KeyError('The result group \'%s\' does not exist' % group)
            attrs = h5_file['results'][group].attrs
            if name not in attrs:
                raise KeyError('The result \'%s\' does not exist' % name)
            value = attrs[name]
            if isinstance(value, bytes):
                value = value.decode('utf-8')
            return value

    def get_result_array(self, group, name):
        """Return dataset `name` of ``'/results/<group>'`` as an array."""
        with h5py.File(self.h5_path, 'r') as h5_file:
            if group not in h5_file['results']:
                raise KeyError('The result group \'%s\' does not exist' % group)
            if name not in h5_file['results'][group]:
                raise KeyError('The result array \'%s\' does not exist' % name)
            return np.array(h5_file['results'][group][name])
