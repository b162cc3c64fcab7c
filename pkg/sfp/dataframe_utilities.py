#####################################################################
#                                                                   #
# /dataframe_utilities.py                                           #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
import csv
import os

import pandas


def flatten_dict(dictionary, keys=tuple()):
    """Takes a nested dictionary whose keys are strings, and returns a
    flat dictionary whose keys are tuples of strings, each element of
    which is the key for one level of the hierarchy. Insertion order is
    kept."""
    result = {}
    for name in dictionary:
        if isinstance(dictionary[name], dict):
            result.update(flatten_dict(dictionary[name], keys=keys + (name,)))
        else:
            result[keys + (name,)] = dictionary[name]
    return result


def join_keys(flat, separator='.'):
    """Turn the tuple keys of a flattened dict into dotted strings."""
    return {separator.join(key): value for key, value in flat.items()}


def rows_to_dataframe(rows, columns):
    """Build a DataFrame with a fixed column order; missing cells are NaN."""
    return pandas.DataFrame(list(rows), columns=list(columns))


def write_csv(frame, path_or_buffer):
    """Write UTF-8 CSV with a header row and RFC 4180 quoting."""
    if isinstance(path_or_buffer, (str, os.PathLike)):
        frame.to_csv(path_or_buffer, index=False, encoding='utf-8',
                     quoting=csv.QUOTE_MINIMAL, lineterminator='\r\n')
    else:
        path_or_buffer.write(
            frame.to_csv(index=False, quoting=csv.QUOTE_MINIMAL,
                         lineterminator='\r\n')
        )
