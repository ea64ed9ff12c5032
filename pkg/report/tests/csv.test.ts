import { describe, expect, it } from "vitest";

import {
  SchemaError,
  parseCactus,
  parseFamily,
  parseScores,
  splitCsv,
} from "../src/csv";

describe("splitCsv", () => {
  it("drops the trailing newline only", () => {
    expect(splitCsv("a,b\n1,2\n")).toEqual([
      ["a", "b"],
      ["1", "2"],
    ]);
    expect(splitCsv("")).toEqual([]);
  });
});

describe("parseCactus", () => {
  it("reads rows in order", () => {
    const rows = parseCactus("tool,rank,time\nx,1,0.500\nx,2,3.000\n");
    expect(rows).toEqual([
      { tool: "x", rank: 1, time: 0.5 },
      { tool: "x", rank: 2, time: 3.0 },
    ]);
  });

  it("rejects a wrong header", () => {
    expect(() => parseCactus("tool,time\n")).toThrow(SchemaError);
    expect(() => parseCactus("")).toThrow(/expected header/);
  });

  it("rejects short rows and bad numbers", () => {
    expect(() => parseCactus("tool,rank,time\nx,1\n")).toThrow(/row 2/);
    expect(() => parseCactus("tool,rank,time\nx,one,1.0\n")).toThrow(/rank/);
    expect(() => parseCactus("tool,rank,time\nx,1,-2\n")).toThrow(/time/);
    expect(() => parseCactus("tool,rank,time\n,1,1.0\n")).toThrow(/tool/);
  });

  it("rejects rank gaps and time regressions", () => {
    expect(() => parseCactus("tool,rank,time\nx,2,1.0\n")).toThrow(
      /rank 2 where 1 expected/,
    );
    expect(() =>
      parseCactus("tool,rank,time\nx,1,5.0\nx,2,4.0\n"),
    ).toThrow(/time decreases/);
  });

  it("keeps interleaved tools apart", () => {
    const rows = parseCactus(
      "tool,rank,time\nx,1,1.0\ny,1,9.0\nx,2,2.0\ny,2,9.0\n",
    );
    expect(rows).toHaveLength(4);
  });
});

describe("parseFamily", () => {
  const HEAD = "family,family_size,tool,solved\n";

  it("reads the matrix rows", () => {
    const rows = parseFamily(HEAD + "f,4,x,1\nf,4,y,2\n");
    expect(rows[1]).toEqual({ family: "f", familySize: 4, tool: "y", solved: 2 });
  });

  it("rejects inconsistent sizes and overfull cells", () => {
    expect(() => parseFamily(HEAD + "f,4,x,1\nf,5,y,2\n")).toThrow(
      /inconsistent family_size/,
    );
    expect(() => parseFamily(HEAD + "f,4,x,5\n")).toThrow(/more than/);
    expect(() => parseFamily(HEAD + "f,4,x,1\nf,4,x,1\n")).toThrow(/duplicate/);
  });
});

describe("parseScores", () => {
  const HEAD = "tool,solved,sat,unsat,unique,avg_time,total_time,par\n";

  it("keeps cells verbatim", () => {
    const table = parseScores(HEAD + "x,3,2,1,0,1.500,4.500,10.500\n");
    expect(table.rows).toEqual([
      ["x", "3", "2", "1", "0", "1.500", "4.500", "10.500"],
    ]);
  });

  it("rejects bad cells and duplicate tools", () => {
    expect(() => parseScores(HEAD + "x,3,2,one,0,1,4,10\n")).toThrow(/unsat/);
    expect(() =>
      parseScores(HEAD + "x,1,1,0,0,1,1,1\nx,1,1,0,0,1,1,1\n"),
    ).toThrow(/duplicate tool/);
  });
});
