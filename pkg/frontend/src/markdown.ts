/** Minimal markdown rendering for service reports: headings, pipe tables,
 * bullet lists, and paragraphs. Everything is escaped; reports are plain
 * data, not trusted HTML. */

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function isTableRow(line: string): boolean {
  return line.startsWith("|") && line.endsWith("|");
}

function isDividerRow(line: string): boolean {
  return isTableRow(line) && /^\|[\s\-|]+\|$/.test(line);
}

function cells(line: string): string[] {
  return line.slice(1, -1).split("|").map((c) => c.trim());
}

export function renderMarkdown(source: string): string {
  const lines = source.split("\n");
  const out: string[] = [];
  let i = 0;
  while (i < lines.length) {
    const line = lines[i].trimEnd();
    if (!line.trim()) {
      i += 1;
      continue;
    }
    const heading = /^(#{1,4})\s+(.*)$/.exec(line);
    if (heading) {
      const level = heading[1].length;
      out.push(`<h${level}>${escapeHtml(heading[2])}</h${level}>`);
      i += 1;
      continue;
    }
    if (isTableRow(line)) {
      const rows: string[][] = [];
      while (i < lines.length && isTableRow(lines[i].trimEnd())) {
        if (!isDividerRow(lines[i].trimEnd())) {
          rows.push(cells(lines[i].trimEnd()));
        }
        i += 1;
      }
      const [head, ...body] = rows;
      const thead = head
        .map((c) => `<th>${escapeHtml(c)}</th>`)
        .join("");
      const tbody = body
        .map((r) => `<tr>${r.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`)
        .join("");
      out.push(`<table><thead><tr>${thead}</tr></thead><tbody>${tbody}</tbody></table>`);
      continue;
    }
    if (line.startsWith("- ")) {
      const items: string[] = [];
      while (i < lines.length && lines[i].trimEnd().startsWith("- ")) {
        items.push(`<li>${escapeHtml(lines[i].trimEnd().slice(2))}</li>`);
        i += 1;
      }
      out.push(`<ul>${items.join("")}</ul>`);
      continue;
    }
    out.push(`<p>${escapeHtml(line)}</p>`);
    i += 1;
  }
  return out.join("\n");
}
