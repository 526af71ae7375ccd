/**
 * Unicode scalar counting, matching the server's 280-character rule exactly:
 * code points, not UTF-16 units and not grapheme clusters. "👩‍🔬" counts as 3.
 */

export const MAX_POST_SCALARS = 280;

export function countScalars(text: string): number {
  let n = 0;
  for (const _ of text) n++;
  return n;
}

export function clampScalars(text: string, limit: number = MAX_POST_SCALARS): string {
  const points = Array.from(text);
  return points.length <= limit ? text : points.slice(0, limit).join("");
}
