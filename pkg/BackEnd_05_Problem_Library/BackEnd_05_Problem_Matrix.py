from BackEnd_01_ARC_Core import ARCInputError, TreeProblem, normal_form_problem

# Rows are actions, columns are scenarios.
MATRIX_CORPUS = {
    "classic": [[3, 1], [2, 2]],
    "identity": [[1, 0], [0, 1]],
    "dominated-row": [[3, 3], [2, 2]],
    "dominated-pair": [[3, 1], [3, 2]],
    "positive-identity": [[2, 1], [1, 2]],
    "single-row": [[3, 1]],
    "three-by-three": [[4, 1, 2], [2, 3, 1], [1, 2, 3]],
    "frontier": [[3, 1], [2, 2], [2.5, 1.5]],
}


def Matrix_Problem(name: str) -> TreeProblem:
    try:
        rows = MATRIX_CORPUS[name]
    except KeyError:
        raise ARCInputError(f"no builtin matrix named {name!r}; known: {sorted(MATRIX_CORPUS)}") from None
    return normal_form_problem(rows, name=name)


def Matrix_From_Rows(rows, name: str = "matrix") -> TreeProblem:
    return normal_form_problem(rows, name=name)
