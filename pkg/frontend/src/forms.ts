// Parsers for the free-text entry areas. They only shape text into API
// payloads; real validation happens server-side and comes back as
// field-level messages.

import type { LocationRow } from "./types.js";

export class FormParseError extends Error {
  constructor(
    public readonly line: number,
    message: string,
  ) {
    super(`line ${line}: ${message}`);
  }
}

/** Parse "id,YYYY-MM-DD,code" lines into location rows; blanks skipped. */
export function parseLocationLines(text: string): LocationRow[] {
  const rows: LocationRow[] = [];
  text.split("\n").forEach((raw, index) => {
    const line = raw.trim();
    if (line.length === 0) return;
    const parts = line.split(",").map((part) => part.trim());
    if (parts.length !== 3 || parts.some((part) => part.length === 0)) {
      throw new FormParseError(index + 1, `expected "id,date,code", got "${raw}"`);
    }
    rows.push({ id: parts[0], date: parts[1], location_code: parts[2] });
  });
  return rows;
}

/** Parse "key = value" lines into a config object; # comments and blanks skipped. */
export function parseConfigLines(text: string): Record<string, string> {
  const config: Record<string, string> = {};
  text.split("\n").forEach((raw, index) => {
    const line = raw.split("#", 1)[0].trim();
    if (line.length === 0) return;
    const eq = line.indexOf("=");
    if (eq <= 0) {
      throw new FormParseError(index + 1, `expected "key = value", got "${raw}"`);
    }
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    if (!key || !value) {
      throw new FormParseError(index + 1, `expected "key = value", got "${raw}"`);
    }
    config[key] = value;
  });
  return config;
}
