/** Thin typed client for the gateway HTTP API. */

import {
  AdviceView,
  ApiError,
  AuctionSummary,
  AutobidView,
  PredictionView,
  StatsView,
} from "./types.js";

/** Server said no: carries the error envelope for the reducer. */
export class RequestRejected extends Error {
  constructor(public status: number, public body: ApiError) {
    super(body.detail);
  }
}

export class ApiClient {
  constructor(private base: string, private token: string | null = null) {}

  setToken(token: string): void {
    this.token = token;
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const envelope: ApiError =
        parsed && typeof parsed.error === "string"
          ? parsed
          : { error: "http-error", detail: `status ${response.status}` };
      throw new RequestRejected(response.status, envelope);
    }
    return parsed as T;
  }

  openSession(name: string): Promise<{ token: string; name: string; address: string }> {
    return this.call("POST", "/session", { name });
  }

  serverTime(): Promise<{ now: number }> {
    return this.call("GET", "/time");
  }

  listAuctions(): Promise<{ auctions: AuctionSummary[]; now: number }> {
    return this.call("GET", "/auctions");
  }

  placeBid(auctionId: string, amount: number): Promise<{ accepted: boolean; auction: AuctionSummary }> {
    return this.call("POST", `/auctions/${encodeURIComponent(auctionId)}/bids`, { amount });
  }

  getAdvice(auctionId: string): Promise<AdviceView> {
    return this.call("GET", `/auctions/${encodeURIComponent(auctionId)}/advice`);
  }

  createAutobid(auctionId: string, maxAmount: number): Promise<AutobidView> {
    return this.call("POST", "/autobids", { auction_id: auctionId, max_amount: maxAmount });
  }

  myAutobids(): Promise<{ autobids: AutobidView[] }> {
    return this.call("GET", "/autobids");
  }

  raiseMax(autobidId: string, newMax: number): Promise<AutobidView> {
    return this.call("POST", `/autobids/${encodeURIComponent(autobidId)}/raise`, { new_max: newMax });
  }

  cancelAutobid(autobidId: string): Promise<AutobidView> {
    return this.call("POST", `/autobids/${encodeURIComponent(autobidId)}/cancel`);
  }

  statsReport(item: string): Promise<StatsView> {
    return this.call("GET", `/reports/stats?item=${encodeURIComponent(item)}`);
  }

  predictionReport(item: string, seed?: number): Promise<PredictionView> {
    const suffix = seed === undefined ? "" : `&seed=${seed}`;
    return this.call("GET", `/reports/prediction?item=${encodeURIComponent(item)}${suffix}`);
  }
}
