/** Verbatim display of service-supplied values.
 *
 * The dashboard is a thin client: it never rounds, scales, or otherwise
 * derives the numbers it shows. `bindValue` is the single path through which
 * model values reach the page, and it tags the element so tests can verify
 * that every displayed number matches a fetched payload exactly.
 */

export function showNumber(v: number | null | undefined): string {
  if (v === null || v === undefined || Number.isNaN(v)) return "—";
  return String(v);
}

export function bindValue(el: Element, v: number | null | undefined): void {
  el.textContent = showNumber(v);
  el.setAttribute("data-value", el.textContent);
}

export function bindText(el: Element, text: string | null | undefined): void {
  el.textContent = text ?? "—";
  if (text !== null && text !== undefined) {
    el.setAttribute("data-value", text);
  }
}
