import { describe, expect, it } from "vitest";

import { actionForKey } from "../src/keyboard.js";

describe("actionForKey", () => {
  it("maps f/a/n to labels, case-insensitively", () => {
    expect(actionForKey("f")).toEqual({ kind: "label", label: "FAVOR" });
    expect(actionForKey("A")).toEqual({ kind: "label", label: "AGAINST" });
    expect(actionForKey("n")).toEqual({ kind: "label", label: "NONE" });
  });

  it("maps Enter to retry", () => {
    expect(actionForKey("Enter")).toEqual({ kind: "retry" });
  });

  it("returns null for unbound keys", () => {
    expect(actionForKey("x")).toBeNull();
    expect(actionForKey("Escape")).toBeNull();
    expect(actionForKey(" ")).toBeNull();
  });
});
