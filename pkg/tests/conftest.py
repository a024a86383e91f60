import textwrap

import pytest


def pytest_runtest_logreport(report):
    # one visible PASS/FAIL line per acceptance criterion
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {status} {name}")


def jats(body: str, pmcid_digits: str = "8000001") -> str:
    """Wrap a body fragment in a minimal JATS article shell."""
    return textwrap.dedent(f"""\
        <article xmlns:xlink="http://www.w3.org/1999/xlink">
          <front>
            <article-meta>
              <article-id pub-id-type="pmc">{pmcid_digits}</article-id>
              <abstract><p>Front-matter abstract, outside the body.</p></abstract>
            </article-meta>
          </front>
          <body>
        {body}
          </body>
        </article>
        """)


REALISTIC_BODY = """\
    <sec>
      <title>Abstract</title>
      <p>We registered the trial (NCT01229865) before enrollment.</p>
    </sec>
    <sec>
      <title>Introduction</title>
      <p>Prior work used <italic>flow cytometry</italic> extensively.</p>
    </sec>
    <sec>
      <title>Materials and Methods</title>
      <p>Participants were recruited in 2019.</p>
      <sec>
        <title>Statistical analysis</title>
        <p>The trial was registered as ISRCTN12345678 and powered at 80%.</p>
      </sec>
      <table-wrap>
        <caption><p>Baseline characteristics.</p></caption>
        <table>
          <tr><td>Age</td><td>63.5</td></tr>
        </table>
      </table-wrap>
    </sec>
    <sec>
      <title>Results</title>
      <p>All analysis code is available at https://github.com/example/trial-analysis.</p>
      <p>NCTC clone 929 cells served as controls.</p>
    </sec>
    <sec>
      <title>Discussion</title>
      <p>See DRKS00011111 for the companion study.</p>
    </sec>"""


@pytest.fixture
def realistic_xml() -> str:
    return jats(REALISTIC_BODY)


@pytest.fixture
def corpus_dir(tmp_path):
    """Directory of small JATS files, one with a PDF sibling, one broken."""
    docs = {
        "PMC8000010": "<sec><title>Methods</title><p>We randomized mice. NCT00000010 is cited.</p></sec>",
        "PMC8000011": "<sec><title>Methods</title><p>Code available at https://github.com/a/b.</p></sec>",
        "PMC8000012": "<sec><title>Results</title><p>No methods section here.</p></sec>",
    }
    for stem, body in docs.items():
        (tmp_path / f"{stem}.xml").write_text(
            jats(body, pmcid_digits=stem[3:]), encoding="utf-8"
        )
    (tmp_path / "PMC8000010.pdf").write_bytes(b"%PDF-1.4 stub")
    (tmp_path / "broken.xml").write_text("<article><body><p>oops", encoding="utf-8")
    (tmp_path / "nobody.xml").write_text(
        "<article><front><article-meta/></front></article>", encoding="utf-8"
    )
    return tmp_path
