const REPLACEMENTS: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(raw: string | number | null | undefined): string {
  if (raw === null || raw === undefined) {
    return "";
  }
  return String(raw).replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch] ?? ch);
}
