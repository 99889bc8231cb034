import * as fs from "fs";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { convertKg } from "../src/convertKg";
import { FIXTURES, python, tmpdir } from "./helpers";

const ASSERTIONS = path.join(FIXTURES, "conceptnet_sample.csv");

describe("adapter-convert-kg", () => {
  it("keeps only requested-language rows (manual filter oracle)", () => {
    const out = path.join(tmpdir(), "kg.tsv");
    const result = convertKg({ assertionsPath: ASSERTIONS, outPath: out, language: "en" });
    // oracle: count rows whose start and end concepts carry /c/en/ by hand
    const manual = fs
      .readFileSync(ASSERTIONS, "utf-8")
      .split("\n")
      .filter((l) => l.trim())
      .filter((l) => {
        const cols = l.split("\t");
        return cols[2]?.startsWith("/c/en/") && cols[3]?.startsWith("/c/en/");
      });
    expect(manual).toHaveLength(3);
    expect(result.rows).toBe(3);
    expect(result.filteredLanguage).toBe(2);
    expect(fs.readFileSync(out, "utf-8").trim().split("\n")).toHaveLength(3);
  });

  it("strips the /r/ prefix and keeps underscores", () => {
    const out = path.join(tmpdir(), "kg.tsv");
    convertKg({ assertionsPath: ASSERTIONS, outPath: out, language: "en" });
    const rows = fs.readFileSync(out, "utf-8").trim().split("\n").map((l) => l.split("\t"));
    expect(rows[0]).toEqual(["kidney", "RelatedTo", "organ"]);
    // sense suffix "/n" dropped, underscores preserved for the core to normalize
    expect(rows).toContainEqual(["ice_cream", "IsA", "dessert"]);
    expect(rows).toContainEqual(["heart", "UsedFor", "pumping_blood"]);
  });

  it("skips malformed rows with a count", () => {
    const dir = tmpdir();
    const src = path.join(dir, "broken.csv");
    fs.writeFileSync(
      src,
      "only two\tcolumns\n" +
        "/a/x\tnot-a-relation\t/c/en/a\t/c/en/b\t{}\n" +
        "/a/y\t/r/IsA\t/c/en/a\t/c/en/b\t{}\n"
    );
    const logs: string[] = [];
    const result = convertKg({
      assertionsPath: src,
      outPath: path.join(dir, "kg.tsv"),
      language: "en",
      log: (m) => logs.push(m),
    });
    expect(result.rows).toBe(1);
    expect(result.malformed).toBe(2);
    expect(logs.some((l) => l.includes("malformed"))).toBe(true);
  });

  it("empty input yields an empty output plus a warning", () => {
    const dir = tmpdir();
    const src = path.join(dir, "empty.csv");
    fs.writeFileSync(src, "");
    const logs: string[] = [];
    const result = convertKg({
      assertionsPath: src,
      outPath: path.join(dir, "kg.tsv"),
      language: "en",
      log: (m) => logs.push(m),
    });
    expect(result.rows).toBe(0);
    expect(fs.readFileSync(path.join(dir, "kg.tsv"), "utf-8")).toBe("");
    expect(logs.some((l) => l.includes("warning"))).toBe(true);
  });

  it("round-trips into the primary graph loader", () => {
    const out = path.join(tmpdir(), "kg.tsv");
    convertKg({ assertionsPath: ASSERTIONS, outPath: out, language: "en" });
    const report = python(
      `
import sys
from dforge.kg import load_kg
kg = load_kg(sys.argv[1])
print(kg.stats.edges, "ice cream" in kg.node_ids)
`,
      [out]
    );
    expect(report.trim()).toBe("3 True");
  });
});
