"""Shared planted-fixture corpus for registration-scanner tests."""

# one well-formed identifier per supported registry
REGISTRY_EXAMPLE_IDS = {
    "ctgov": "NCT01234567",
    "umin": "UMIN000012345",
    "drks": "DRKS00012345",
    "irct": "IRCT20190101042345N1",
    "chictr": "ChiCTR1900021234",
    "isrctn": "ISRCTN12345678",
    "ctri": "CTRI/2019/01/017123",
    "eudract": "2018-001234-15",
    "actrn": "ACTRN12619000123456",
    "jrct": "jRCT2031190123",
    "kct": "KCT0001234",
    "ntr": "NTR6543",
    "pactr": "PACTR201901123456789",
}

# look-alike strings the scanner must NOT match, one per curated
# false-positive category
LURES = {
    "funding_id": "This work was supported by grant NCT-2019-44 from the foundation.",
    "drug_id": "Patients received BMS-986165 daily for six weeks.",
    "datapoint": "Sequencing produced 12345678 reads in total.",
    "catalog_id": "Cells were stained with anti-CD3 (Cat# A11001-500).",
    "medical_acronym": "NCTC clone 929 cells served as a control line.",
    "medical_device": "Ventilation used the DRKS-200 ventilator system.",
}


def planted_registration_text() -> str:
    """One sentence per registry identifier followed by the six lures."""
    sentences = [
        f"The trial was registered as {identifier} before enrollment."
        for identifier in REGISTRY_EXAMPLE_IDS.values()
    ]
    sentences.extend(LURES.values())
    return " ".join(sentences)
