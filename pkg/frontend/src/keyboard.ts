/** Keyboard shortcuts: f/a/n pick a label, Enter retries a failed submit. */

import { Label } from "./api.js";

export type KeyAction = { kind: "label"; label: Label } | { kind: "retry" };

const LABEL_KEYS: Record<string, Label> = {
  f: "FAVOR",
  a: "AGAINST",
  n: "NONE",
};

/** Map a key press to an action, or null when the key is unbound. */
export function actionForKey(key: string): KeyAction | null {
  const label = LABEL_KEYS[key.toLowerCase()];
  if (label) return { kind: "label", label };
  if (key === "Enter") return { kind: "retry" };
  return null;
}
