"""Published cluster-head/normal energy tables, transcribed verbatim.

Columns: N_Total, N_cluster-head, N_normal, E_Total, E_cluster-head,
E_normal, Q. Inconsistent rows (e.g. 14 + 36 != 60) are kept as printed.
"""

AREA = "300X300"

CDS_RULE_K_ROWS = [
    (20, 9, 11, 0.397177, 0.327978571, 0.466375794, 0.93879004),
    (30, 5, 25, 0.323038, 0.319709, 0.326367, 0.986342525),
    (40, 11, 29, 0.313583, 0.283117, 0.344048, 0.911682595),
    (50, 13, 37, 0.336075, 0.311768, 0.360382, 0.930523279),
    (60, 14, 36, 0.366331, 0.339762, 0.392899, 1.12246041),
    (70, 11, 59, 5.328688266, 5.2491713, 5.408205232, 0.979731585),
    (80, 12, 68, 8.500981322, 7.882336213, 9.11962643, 0.903196574),
    (90, 9, 81, 9.920066094, 9.968660678, 9.871471511, 1.007875323),
    (100, 11, 89, 13.20144444, 13.3004, 13.10248889, 1.011774301),
]

A3_ROWS = [
    (20, 6, 14, 1.04866, 1.128012, 0.969307, 1.057988),
    (30, 9, 21, 1.222795, 1.300374, 1.145216, 1.049021),
    (40, 10, 30, 1.402737, 1.511228, 1.294246, 1.076844),
    (50, 9, 49, 1.737234, 1.869262, 1.605205, 0.956845),
    (60, 9, 51, 1.928685, 2.17987, 1.6775, 1.198135),
    (70, 10, 60, 2.085768, 2.277628, 1.893907, 1.140181),
    (80, 9, 71, 2.418759, 2.633707, 2.203811, 1.149223),
    (90, 11, 79, 9.600267, 9.229915, 9.970619, 0.94359),
    (100, 13, 87, 2.853738, 2.882799, 2.824677, 1.015195),
]

EECDS_ROWS = [
    (20, 4, 16, 1.338583, 1.156991, 1.520175, 0.8466),
    (30, 7, 23, 4.90182, 5.018501, 4.785139, 1.025456),
    (40, 9, 31, 3.876517, 3.510025, 4.243009, 0.898526),
    (50, 8, 42, 6.304055, 6.112637, 6.495473, 0.959493),
    (60, 8, 52, 7.888325, 7.93423, 7.84242, 1.008574),
    (70, 10, 60, 7.485043, 7.326598, 7.643487, 0.970225),
    (80, 8, 72, 10.59175, 10.20065, 10.98284, 0.943002),
    (90, 10, 80, 13.7097, 12.69144, 14.72796, 0.892019),
    (100, 10, 90, 17.30591, 15.9817, 18.63012, 0.886302),
]

# protocol value -> (rows, claimed relative band around Q = 1)
PAPER_TABLES = {
    "cds-rule-k": (CDS_RULE_K_ROWS, 0.10),
    "a3": (A3_ROWS, 0.14),
    "eecds": (EECDS_ROWS, 0.12),
}
