"""CamS: connection-aware motif sequencing for molecular graphs."""

from ._core import (
    BOS_ID,
    CONCAT_ID,
    EOS_ID,
    UNK_ID,
    Molecule,
    SmilesParseError,
    Vocabulary,
    canonical_smiles,
    encode,
    encode_explain,
    encode_multiscale,
    find_cliff_pairs,
    fingerprint_bits,
    fragment_code,
    label_pair,
    levenshtein_similarity,
    mcs,
    murcko_scaffold,
    parse_smiles,
    rel_dtap,
    supervision_density,
    tanimoto,
    train_vocabs,
)

__all__ = [
    "BOS_ID",
    "CONCAT_ID",
    "EOS_ID",
    "UNK_ID",
    "Molecule",
    "SmilesParseError",
    "Vocabulary",
    "canonical_smiles",
    "encode",
    "encode_explain",
    "encode_multiscale",
    "find_cliff_pairs",
    "fingerprint_bits",
    "fragment_code",
    "label_pair",
    "levenshtein_similarity",
    "mcs",
    "murcko_scaffold",
    "parse_smiles",
    "rel_dtap",
    "supervision_density",
    "tanimoto",
    "train_vocabs",
]
