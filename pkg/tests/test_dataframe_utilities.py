import io

import numpy as np
import pandas

from sfp.dataframe_utilities import (flatten_dict, join_keys,
                                     rows_to_dataframe, write_csv)


def test_flatten_and_join_keep_order():
    nested = {'b': 1, 'a': {'z': 2, 'y': {'x': 3}}, 'c': None}
    flat = flatten_dict(nested)
    assert list(flat) == [('b',), ('a', 'z'), ('a', 'y', 'x'), ('c',)]
    assert join_keys(flat) == {'b': 1, 'a.z': 2, 'a.y.x': 3, 'c': None}
    assert list(join_keys(flat, '/')) == ['b', 'a/z', 'a/y/x', 'c']


def test_rows_to_dataframe_fixes_columns():
    frame = rows_to_dataframe([{'b': 2, 'a': 1}, {'a': 3}], ['a', 'b'])
    assert list(frame.columns) == ['a', 'b']
    assert np.isnan(frame['b'][1])
    assert len(rows_to_dataframe([], ['a', 'b'])) == 0


def test_write_csv_quoting(tmp_path):
    frame = pandas.DataFrame({'input': ['plain.png', 'with,comma.png'],
                              'errors': ['', 'FormatError: "bad" file']})
    buffer = io.StringIO()
    write_csv(frame, buffer)
    assert buffer.getvalue() == (
        'input,errors\r\n'
        'plain.png,\r\n'
        '"with,comma.png","FormatError: ""bad"" file"\r\n'
    )
    write_csv(frame, tmp_path / 'out.csv')
    assert (tmp_path / 'out.csv').read_bytes() == \
        buffer.getvalue().encode('utf-8')
