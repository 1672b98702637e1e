/** Case queue: rows in API order (never re-sorted), urgent rows highlighted
 * in red at the row level, labels as colored badges. */

import { badgeFor } from "./badges.js";
import type { QueueRow } from "./types.js";

export function renderQueue(
  root: HTMLElement,
  rows: QueueRow[],
  onOpen: (caseId: string) => void,
): void {
  root.replaceChildren();
  const heading = document.createElement("h1");
  heading.textContent = "Review queue";
  const table = document.createElement("table");
  table.className = "queue";
  const head = document.createElement("tr");
  for (const title of ["Case", "Urgency", "Status", ""]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.append(th);
  }
  table.append(head);

  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.dataset.caseId = row.case_id;
    if (row.label === "urgent") {
      tr.classList.add("urgent-row");
    }

    const idCell = document.createElement("td");
    idCell.textContent = row.case_id;
    const labelCell = document.createElement("td");
    labelCell.append(badgeFor(row.label));
    const statusCell = document.createElement("td");
    statusCell.textContent = row.status;
    const actionCell = document.createElement("td");
    const open = document.createElement("a");
    open.href = `#/case/${row.case_id}`;
    open.textContent = "open";
    open.addEventListener("click", (event) => {
      event.preventDefault();
      onOpen(row.case_id);
    });
    actionCell.append(open);

    tr.append(idCell, labelCell, statusCell, actionCell);
    table.append(tr);
  }
  root.append(heading, table);
}
