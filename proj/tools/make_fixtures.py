#!/usr/bin/env python3
"""Regenerates the test fixtures under tests/data.

Run from anywhere: python3 tools/make_fixtures.py
Requires reportlab. Output is deterministic, so the files are committed.
"""

import json
import textwrap
from pathlib import Path

from reportlab.lib.pagesizes import A4
from reportlab.pdfgen import canvas

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

FINE = {
    "GO.1.1": "Board's responsibility for overseeing climate-related issues",
    "GO.1.2": "Executive management's strategic role related to the assessment and management of climate-related issues",
    "ST.1.1": "Climate-related transition risks such as policy, legal, technology, market and reputation risks emerging from climate change",
    "ST.1.2": "Climate-related physical risks such as acute weather events and chronic shifts in weather patterns",
    "ST.1.3": "Material financial impact of climate-related issues",
    "ST.1.4": "Credit exposure to carbon-related sectors",
    "ST.1.5": "Financing and investment for carbon-intensive industries such as fossil fuel industry",
    "ST.1.6": "Use of climate-related scenario models to analyse the impact of climate-related risks",
    "ST.1.7": "Resilience of the bank's strategy under different climate-related scenarios",
    "RM.1.1": "Processes to identify, assess and manage climate-related risks and integrate them into overall risk management",
    "RM.1.2": "Relationship between climate-related risks and financial risks such as credit risk, market risk, liquidity risk and operational risk",
    "MT.1.1": "Carbon footprint, direct and indirect greenhouse gas emissions",
    "MT.1.2": "Incorporation of climate-related performance metrics into remuneration policies",
    "MT.1.3": "Emissions reduction and carbon neutrality targets",
}

NONE_SENTENCES = [
    "The branch network opened new offices in several cities during the year.",
    "Dividends were paid to ordinary shareholders in May and November.",
    "Customer deposits grew steadily while the loan book remained stable.",
    "The annual general meeting will be held at the head office in April.",
]

# Yearly means (2010..2021) of the general and category labels.
TABLE4 = {
    "GENERAL.GOVERNANCE": [.31, .31, .30, .30, .31, .31, .31, .31, .31, .31, .32, .32],
    "GO.1": [.11, .11, .12, .11, .12, .12, .12, .13, .14, .15, .17, .19],
    "GENERAL.STRATEGY": [.40, .40, .40, .40, .39, .40, .39, .40, .39, .40, .40, .40],
    "ST.1": [.12, .12, .12, .12, .12, .13, .13, .14, .15, .17, .20, .22],
    "GENERAL.RISK_MANAGEMENT": [.23, .23, .24, .23, .24, .23, .23, .23, .23, .23, .24, .24],
    "RM.1": [.09, .08, .09, .09, .09, .09, .09, .10, .11, .12, .15, .16],
    "GENERAL.METRICS_TARGETS": [.31, .31, .31, .31, .31, .32, .31, .32, .32, .32, .33, .34],
    "MT.1": [.12, .12, .12, .12, .12, .13, .13, .13, .14, .16, .18, .20],
}

# Banks by region and size class (Large, Medium, Small).
TABLE1 = {
    "AsiaPacific": (15, 51, 24),
    "Europe": (23, 26, 17),
    "LatinAmerica": (0, 4, 3),
    "MiddleEastAfrica": (0, 3, 2),
    "NorthAmerica": (9, 8, 3),
}


def lower_first(s):
    return s[0].lower() + s[1:]


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def new_canvas(path, **kw):
    path.parent.mkdir(parents=True, exist_ok=True)
    c = canvas.Canvas(str(path), pagesize=A4, invariant=1, **kw)
    return c


def draw_paragraph(c, text, y, size=11, leading=14, width=88):
    c.setFont("Helvetica", size)
    for line in textwrap.wrap(text, width):
        c.drawString(72, y, line)
        y -= leading
    return y


def draw_table(c, rows, y, size=10, leading=13):
    c.setFont("Helvetica", size)
    for row in rows:
        for i, cell in enumerate(row):
            c.drawString(72 + 90 * i, y, cell)
        y -= leading
    return y


TABLE_ROWS = [
    ["2019", "12,345", "6,789", "4.5%"],
    ["2020", "13,210", "7,015", "4.9%"],
    ["2021", "14,002", "7,433", "5.2%"],
]


def paragraph_table_pdf():
    c = new_canvas(DATA / "pdf" / "paragraph_table.pdf")
    y = draw_paragraph(
        c,
        "The board of directors oversees climate-related issues and reviews the group's "
        "exposure to transition risks at least twice a year. Management reports progress "
        "on emissions targets to the risk committee.",
        780,
    )
    draw_table(c, TABLE_ROWS, y - 40)
    c.showPage()
    c.save()


def image_only_pdf():
    c = new_canvas(DATA / "pdf" / "image_only.pdf")
    c.setFillColorRGB(0.2, 0.5, 0.3)
    c.rect(72, 500, 300, 200, fill=1)
    c.circle(300, 300, 80, fill=1)
    c.showPage()
    c.save()


def encrypted_pdf():
    c = new_canvas(DATA / "pdf" / "encrypted.pdf", encrypt="secret")
    draw_paragraph(c, "This text is protected by a password.", 780)
    c.showPage()
    c.save()


def assemble_pdf(objects, root=1):
    """Serialises numbered objects with a valid xref table."""
    out = bytearray(b"%PDF-1.4\n")
    offsets = []
    for i, body in enumerate(objects, start=1):
        offsets.append(len(out))
        out += f"{i} 0 obj\n".encode() + body + b"\nendobj\n"
    xref = len(out)
    out += f"xref\n0 {len(objects) + 1}\n0000000000 65535 f \n".encode()
    for off in offsets:
        out += f"{off:010d} 00000 n \n".encode()
    out += f"trailer\n<< /Size {len(objects) + 1} /Root {root} 0 R >>\nstartxref\n{xref}\n%%EOF\n".encode()
    return bytes(out)


def empty_pdf():
    objects = [b"<< /Type /Catalog /Pages 2 0 R >>", b"<< /Type /Pages /Kids [] /Count 0 >>"]
    (DATA / "pdf" / "empty.pdf").write_bytes(assemble_pdf(objects))


def tounicode_pdf():
    """Type0 font whose two-byte codes only decode through a ToUnicode CMap."""
    text = "Climate risk is material."
    chars = sorted(set(text))
    code = {ch: i + 1 for i, ch in enumerate(chars)}
    hexstr = "".join(f"{code[ch]:04X}" for ch in text)
    content = f"BT /F1 12 Tf 72 700 Td <{hexstr}> Tj ET".encode()
    cmap_lines = "\n".join(f"<{code[ch]:04X}> <{ord(ch):04X}>" for ch in chars)
    cmap = (
        "/CIDInit /ProcSet findresource begin 12 dict begin begincmap\n"
        "1 begincodespacerange <0000> <FFFF> endcodespacerange\n"
        f"{len(chars)} beginbfchar\n{cmap_lines}\nendbfchar\n"
        "endcmap CMapName currentdict /CMap defineresource pop end end"
    ).encode()
    objects = [
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
        b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 595 842] "
        b"/Resources << /Font << /F1 5 0 R >> >> /Contents 4 0 R >>",
        b"<< /Length %d >>\nstream\n" % len(content) + content + b"\nendstream",
        b"<< /Type /Font /Subtype /Type0 /BaseFont /Test /Encoding /Identity-H "
        b"/DescendantFonts [6 0 R] /ToUnicode 7 0 R >>",
        b"<< /Type /Font /Subtype /CIDFontType2 /BaseFont /Test /DW 500 >>",
        b"<< /Length %d >>\nstream\n" % len(cmap) + cmap + b"\nendstream",
    ]
    (DATA / "pdf" / "tounicode.pdf").write_bytes(assemble_pdf(objects))


def malformed_pdf():
    (DATA / "pdf" / "malformed.pdf").write_bytes(b"this is not a pdf\x00\x01\x02 at all\n" * 4)


# ---------------------------------------------------------------------------

CORPUS = [
    ("R1", "B1", "Annual", 2019, ["GO.1.1", "ST.1.4", "MT.1.1"]),
    ("R2", "B2", "Sustainability", 2020, ["ST.1.2", "RM.1.1", "MT.1.3"]),
    ("R3", "B3", "TCFD", 2021, ["GO.1.2", "ST.1.6", "RM.1.2", "MT.1.2"]),
]


def report_pdf(path, year, codes):
    c = new_canvas(path)
    c.setFont("Helvetica-Bold", 18)
    c.drawString(72, 790, f"Report {year}")
    y = 750
    for i, code in enumerate(codes):
        text = (
            f"In {year} the bank continued to disclose {lower_first(FINE[code])}. "
            f"{FINE[code]} were discussed by the relevant committees. "
            f"{NONE_SENTENCES[i % len(NONE_SENTENCES)]}"
        )
        y = draw_paragraph(c, text, y) - 30
        if i == 1:
            y = draw_table(c, TABLE_ROWS, y) - 30
            c.showPage()
            y = 780
    c.showPage()
    c.save()


def corpus():
    base = DATA / "corpus"
    manifest = ["report_id\tbank_id\tcategory\tfinancial_year\tpath"]
    for rid, bank, cat, year, codes in CORPUS:
        report_pdf(base / f"{rid}.pdf", year, codes)
        manifest.append(f"{rid}\t{bank}\t{cat}\t{year}\t{rid}.pdf")
    write(base / "manifest.tsv", "\n".join(manifest) + "\n")
    write(
        base / "manifest_partial.tsv",
        "\n".join(
            manifest[:2]
            + ["R4\tB2\tAnnual\t2020\t../pdf/malformed.pdf", "R5\tB3\tAnnual\t2021\tmissing.pdf"]
        )
        + "\n",
    )
    write(
        base / "registry.tsv",
        "bank_id\tname\tregion\ttotal_assets_usd\n"
        "B1\tNorthern Bank\tEurope\t620000000000\n"
        "B2\tHarbour Bank\tAsiaPacific\t120000000000\n"
        "B3\tPrairie Bank\tNorthAmerica\t45000000000\n",
    )
    blocks = []
    for rid, _, _, year, codes in CORPUS:
        blocks.append({"report_id": rid, "block_index": 0, "page": 1, "tag": "Title", "text": f"Report {year}"})
        for i, code in enumerate(codes, start=1):
            blocks.append(
                {
                    "report_id": rid,
                    "block_index": i,
                    "page": 1,
                    "tag": "BodyContent",
                    "text": f"In {year} the bank continued to disclose {lower_first(FINE[code])}.",
                }
            )
        blocks.append(
            {"report_id": rid, "block_index": len(codes) + 1, "page": 2, "tag": "Table", "text": "2019 12,345 6,789"}
        )
    write(base / "blocks.jsonl", "".join(json.dumps(b) + "\n" for b in blocks))


def table1_registry():
    lines = ["bank_id\tname\tregion\ttotal_assets_usd"]
    n = 0
    for region, (large, medium, small) in TABLE1.items():
        # Boundary values sit at both ends of the closed medium interval.
        samples = (
            [501e9 + 10e9 * i for i in range(large)],
            [50e9 if i == 0 else 500e9 if i == 1 else 60e9 + 5e9 * i for i in range(medium)],
            [49.9e9 - 1e9 * i for i in range(small)],
        )
        for assets in samples[0] + samples[1] + samples[2]:
            n += 1
            lines.append(f"T{n:03d}\tBank {n}\t{region}\t{assets:.0f}")
    write(DATA / "table1" / "registry.tsv", "\n".join(lines) + "\n")


def table4():
    """One report per year; three sequences per label average to the target mean."""
    reports = ["report_id\tbank_id\tcategory\tfinancial_year"]
    rows = [
        "# backend: fixture",
        "# template: This example is about {}.",
        "# template-hash: fixture",
        "# taxonomy-version: builtin-tcfd-1",
        "sequence_id\treport_id\tlabel_code\tp",
    ]
    for k, year in enumerate(range(2010, 2022)):
        rid = f"Y{year}"
        reports.append(f"{rid}\tB1\tAnnual\t{year}")
        for s, delta in enumerate((-0.01, 0.0, 0.01)):
            for code, means in TABLE4.items():
                rows.append(f"{rid}:{s:05d}\t{rid}\t{code}\t{means[k] + delta:.6f}")
    write(DATA / "table4" / "reports.tsv", "\n".join(reports) + "\n")
    write(DATA / "table4" / "probabilities.tsv", "\n".join(rows) + "\n")
    write(
        DATA / "table4" / "means.tsv",
        "label_code\t" + "\t".join(str(y) for y in range(2010, 2022)) + "\n"
        + "".join(code + "\t" + "\t".join(f"{m:.2f}" for m in means) + "\n" for code, means in TABLE4.items()),
    )


def gold():
    lines = ["# taxonomy-version: builtin-tcfd-1", "sentence_id\tlabels\ttext"]
    n = 0
    for code, desc in FINE.items():
        for text in (
            f"{desc} remain a priority for the group.",
            f"This year we describe {lower_first(desc)} in detail.",
            f"The report explains {lower_first(desc)}.",
        ):
            n += 1
            lines.append(f"G{n:03d}\t{code}\t{text}")
    pairs = [("GO.1.1", "MT.1.3"), ("ST.1.2", "RM.1.1")]
    for a, b in pairs:
        n += 1
        lines.append(f"G{n:03d}\t{a};{b}\t{FINE[a]} and {lower_first(FINE[b])} are covered.")
    for text in NONE_SENTENCES:
        n += 1
        lines.append(f"G{n:03d}\tNONE\t{text}")
    write(DATA / "gold" / "gold.tsv", "\n".join(lines) + "\n")


def custom_labels():
    write(
        DATA / "labels" / "custom.tsv",
        "# version: custom-3\n"
        "code\tpillar\tgranularity\tdescription\n"
        "WATER\tRiskManagement\tCategory\tWater scarcity and drought exposure\n"
        "HEAT\tStrategy\tCategory\tHeat stress on workers and assets\n"
        "NONE\tNone\tGeneral\tnone of the above\n",
    )


def main():
    paragraph_table_pdf()
    image_only_pdf()
    encrypted_pdf()
    empty_pdf()
    tounicode_pdf()
    malformed_pdf()
    corpus()
    table1_registry()
    table4()
    gold()
    custom_labels()


if __name__ == "__main__":
    main()
