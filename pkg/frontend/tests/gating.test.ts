import { describe, expect, it } from "vitest";

import { approveEnabled, unmetControl } from "../src/gating.js";
import type { FollowUpInterval } from "../src/types.js";

describe("approve gate mirror", () => {
  // Service rule: approve succeeds iff medications confirmed AND an interval
  // is selected. The button must be enabled in exactly that combination.
  const combos: [boolean, FollowUpInterval, boolean][] = [
    [false, "none_selected", false],
    [false, "1_month", false],
    [true, "none_selected", false],
    [true, "1_month", true],
  ];

  it.each(combos)(
    "confirmed=%s interval=%s -> enabled=%s",
    (confirmed, interval, expected) => {
      expect(approveEnabled(confirmed, interval)).toBe(expected);
    },
  );

  it("is a pure function of checkbox and dropdown state", () => {
    for (const interval of [
      "1_week",
      "2_weeks",
      "1_month",
      "3_months",
    ] as FollowUpInterval[]) {
      expect(approveEnabled(true, interval)).toBe(true);
      expect(approveEnabled(false, interval)).toBe(false);
    }
    expect(approveEnabled(true, "none_selected")).toBe(false);
  });

  it("names the first unmet control, matching the service error order", () => {
    expect(unmetControl(false, "none_selected")).toBe("medications_confirmed");
    expect(unmetControl(false, "1_week")).toBe("medications_confirmed");
    expect(unmetControl(true, "none_selected")).toBe("follow_up_interval");
    expect(unmetControl(true, "2_weeks")).toBeNull();
  });
});
