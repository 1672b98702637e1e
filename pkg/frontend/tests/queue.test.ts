import { describe, expect, it } from "vitest";

import { BADGE_COLORS } from "../src/badges.js";
import { renderQueue } from "../src/queue.js";
import type { QueueRow, UrgencyLabel } from "../src/types.js";

function cohortRows(): QueueRow[] {
  // 14 urgent / 8 attention / 2 stable, interleaved to prove order is
  // API order, not urgency order.
  const labels: UrgencyLabel[] = [];
  for (let i = 0; i < 14; i++) labels.push("urgent");
  for (let i = 0; i < 8; i++) labels.push("attention");
  for (let i = 0; i < 2; i++) labels.push("stable");
  // deterministic interleave
  const shuffled = labels
    .map((label, i) => ({ label, key: (i * 7) % 24 }))
    .sort((a, b) => a.key - b.key)
    .map((x) => x.label);
  return shuffled.map((label, i) => ({
    case_id: `case-${String(i).padStart(2, "0")}`,
    label,
    status: "triaged",
  }));
}

describe("queue rendering", () => {
  it("renders 14 red-highlighted urgent rows in API order", () => {
    const root = document.createElement("div");
    const rows = cohortRows();
    renderQueue(root, rows, () => {});

    const rendered = Array.from(
      root.querySelectorAll<HTMLTableRowElement>("tr[data-case-id]"),
    );
    expect(rendered.length).toBe(24);
    expect(rendered.map((tr) => tr.dataset.caseId)).toEqual(
      rows.map((r) => r.case_id),
    );
    const urgentRows = rendered.filter((tr) =>
      tr.classList.contains("urgent-row"),
    );
    expect(urgentRows.length).toBe(14);
    for (const tr of rendered) {
      const row = rows.find((r) => r.case_id === tr.dataset.caseId)!;
      expect(tr.classList.contains("urgent-row")).toBe(row.label === "urgent");
    }
  });

  it("colors badges red/amber/green by label", () => {
    const root = document.createElement("div");
    const rows: QueueRow[] = [
      { case_id: "a", label: "urgent", status: "triaged" },
      { case_id: "b", label: "attention", status: "triaged" },
      { case_id: "c", label: "stable", status: "triaged" },
      { case_id: "d", label: null, status: "ingested" },
    ];
    renderQueue(root, rows, () => {});
    const badges = Array.from(root.querySelectorAll<HTMLSpanElement>(".badge"));
    expect(badges[0].style.backgroundColor).not.toBe("");
    expect(badges[0].className).toContain("badge-urgent");
    expect(badges[1].className).toContain("badge-attention");
    expect(badges[2].className).toContain("badge-stable");
    expect(badges[3].textContent).toBe("untriaged");
    expect(BADGE_COLORS.urgent).toBe("#c62828");
    expect(BADGE_COLORS.attention).toBe("#ef6c00");
    expect(BADGE_COLORS.stable).toBe("#2e7d32");
  });

  it("never reorders rows by urgency", () => {
    const root = document.createElement("div");
    const rows: QueueRow[] = [
      { case_id: "stable-first", label: "stable", status: "triaged" },
      { case_id: "urgent-second", label: "urgent", status: "triaged" },
    ];
    renderQueue(root, rows, () => {});
    const ids = Array.from(
      root.querySelectorAll<HTMLTableRowElement>("tr[data-case-id]"),
    ).map((tr) => tr.dataset.caseId);
    expect(ids).toEqual(["stable-first", "urgent-second"]);
  });

  it("open action routes by case id", () => {
    const root = document.createElement("div");
    const opened: string[] = [];
    renderQueue(
      root,
      [{ case_id: "x1", label: "stable", status: "drafted" }],
      (id) => opened.push(id),
    );
    root.querySelector("a")!.dispatchEvent(new MouseEvent("click"));
    expect(opened).toEqual(["x1"]);
  });
});
